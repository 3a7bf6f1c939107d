#include <doctest.h>

#include <cmath>
#include <numbers>

#include "entlab/linop.hpp"
#include "entlab/random.hpp"
#include "entlab/recovery.hpp"

using namespace entlab;

namespace {

SystemLayout lay(LabelSet l, std::vector<int> d) { return {std::move(l), std::move(d)}; }

LabeledOperator state(const SystemLayout& l, std::uint64_t seed, int rank = 0) {
  Rng rng(seed);
  return ginibre_state(l, rng, rank).op();
}

CVec unit(int d, Rng& rng) {
  CVec v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.complex_normal();
  return v / v.norm();
}

SeparableDecomposition random_separable(const SystemLayout& l, const std::vector<LabelSet>& groups, int terms,
                                        std::uint64_t seed) {
  Rng rng(seed);
  SeparableDecomposition s;
  s.layout = l;
  s.groups = groups;
  double total = 0.0;
  for (int k = 0; k < terms; ++k) {
    std::vector<CVec> vs;
    for (const auto& g : groups) vs.push_back(unit(l.dim_of(g), rng));
    s.vectors.push_back(vs);
    s.weights.push_back(0.2 + rng.uniform());
    total += s.weights.back();
  }
  for (auto& w : s.weights) w /= total;
  return s;
}

}  // namespace

TEST_CASE("beta0 rule integrates the density") {
  CHECK(beta0_density(0.0) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-15));
  for (int n : {201, 401}) {
    const QuadratureRule r = beta0_rule(n);
    double s = 0.0, m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < r.count(); ++i) {
      s += r.weights[i];
      m1 += r.weights[i] * r.nodes[i];
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
    CHECK(std::abs(m1) <= 1e-14);
    (void)m2;
  }
  CHECK_THROWS_AS(beta0_rule(200), ParameterError);
  CHECK_THROWS_AS(beta0_rule(1), ParameterError);
}

TEST_CASE("product anchor appends its marginal") {
  const LabeledOperator ra = state(lay({"A"}, {2}), 1);
  const LabeledOperator rc = state(lay({"C"}, {3}), 2);
  const LabeledOperator anchor = reorder(tensor(ra, rc), {"A", "C"});
  const LabeledOperator x = state(lay({"C"}, {3}), 3);
  for (double t : {0.0, 1.3}) {
    const LabeledOperator y = rotated_petz(anchor, {"C"}, t).apply(x);
    CHECK(y.layout().labels() == LabelSet{"C", "A"});
    CHECK(max_abs(y.mat() - kron(x.mat(), ra.mat())) <= 1e-10);
  }
}

TEST_CASE("maps are CPTP on the source support") {
  const LabeledOperator full = state(lay({"B", "C"}, {2, 3}), 4);
  const LabeledOperator deficient = state(lay({"B", "C"}, {3, 2}), 5, 2);
  for (const auto* anchor : {&full, &deficient})
    for (double t : {-2.0, 0.0, 0.7}) {
      const RecoveryMap r = rotated_petz(*anchor, {"B"}, t);
      CHECK(r.tp_deviation() <= 1e-10);
      CHECK(min_eigenvalue(hermitian_part(r.choi())) >= -1e-10);
    }
  const LabeledOperator bad(lay({"B", "C"}, {2, 2}), Mat::Identity(4, 4) * -1.0);
  CHECK_THROWS_AS(PetzFamily(bad, {"B"}), DomainError);
}

TEST_CASE("Markov states are recovered exactly") {
  // ρ_ABC = Σ_b p_b ρ_A^b ⊗ |b⟩⟨b| ⊗ ρ_C^b.
  const int db = 3;
  const std::vector<double> p{0.5, 0.3, 0.2};
  Mat acc = Mat::Zero(2 * db * 2, 2 * db * 2);
  for (int b = 0; b < db; ++b) {
    Mat e = Mat::Zero(db, db);
    e(b, b) = 1.0;
    acc += p[b] * kron(kron(state(lay({"A"}, {2}), 10 + b).mat(), e), state(lay({"C"}, {2}), 20 + b).mat());
  }
  const LabeledOperator rho(lay({"A", "B", "C"}, {2, db, 2}), acc);
  const LabeledOperator rbc = marginal(rho, {"B", "C"});
  const LabeledOperator rab = marginal(rho, {"A", "B"});
  for (double t : {0.0, 0.4, -3.0}) {
    const LabeledOperator y = rotated_petz(rbc, {"B"}, t).apply(rab);
    CHECK(max_abs(reorder(y, {"A", "B", "C"}).mat() - acc) <= 1e-8);
  }
  const RecoveryPlan plan{PetzFamily(rbc, {"B"})};
  const QuadratureRule rule = beta0_rule(41);
  const std::vector<double> f = node_fidelities(plan, rule, rab, rho);
  for (double v : f) CHECK(std::abs(v - 1.0) <= 1e-8);
  CHECK(std::abs(fidelity_bound(rule, f)) <= 1e-8);
}

TEST_CASE("quadrature refinement and fidelity shortcut") {
  const LabeledOperator anchor = state(lay({"B", "C"}, {2, 2}), 30);
  const LabeledOperator x = state(lay({"A", "B"}, {2, 2}), 31);
  const RecoveryPlan plan{PetzFamily(anchor, {"B"})};
  const LabeledOperator y1 = averaged_recover(plan, beta0_rule(201), x);
  const LabeledOperator y2 = averaged_recover(plan, beta0_rule(401), x);
  CHECK(max_abs(y1.mat() - y2.mat()) <= 1e-9);

  const LabeledOperator target = state(lay({"C", "A", "B"}, {2, 2, 2}), 32);
  const QuadratureRule rule = beta0_rule(11, 3.0);
  const std::vector<double> f = node_fidelities(plan, rule, x, target);
  for (int i = 0; i < rule.count(); ++i) {
    const LabeledOperator yi = recover_at(plan, rule.nodes[i], x);
    const double direct = fidelity(reorder(target, yi.layout().labels()).mat(), yi.mat());
    CHECK(std::abs(f[i] - direct) <= 1e-10);
  }
}

TEST_CASE("composition order of maps on disjoint systems") {
  const LabeledOperator a1 = state(lay({"X", "P"}, {2, 2}), 40);
  const LabeledOperator a2 = state(lay({"Y", "Q"}, {2, 3}), 41);
  const LabeledOperator in = state(lay({"X", "Y"}, {2, 2}), 42);
  const RecoveryPlan p12{PetzFamily(a1, {"X"}), PetzFamily(a2, {"Y"})};
  const RecoveryPlan p21{PetzFamily(a2, {"Y"}), PetzFamily(a1, {"X"})};
  const LabeledOperator y12 = recover_at(p12, 0.9, in);
  const LabeledOperator y21 = recover_at(p21, 0.9, in);
  CHECK(max_abs(reorder(y21, y12.layout().labels()).mat() - y12.mat()) <= 1e-12);
  CHECK_THROWS_AS(PetzFamily(a1, {"X"}).at(0.0).apply(y12), CompositionError);
}

TEST_CASE("transpose identity") {
  Mat re = state(lay({"B", "C"}, {2, 2}), 50).mat().real().cast<Complex>();
  re = re / re.trace();
  CHECK(min_eigenvalue(re) > 0.0);
  CHECK(transpose_twirl_identity(LabeledOperator(lay({"B", "C"}, {2, 2}), re), {"B"}, 0.7) <= 1e-12);
  const LabeledOperator cx = state(lay({"B", "C"}, {2, 2}), 51);
  for (double t : {0.0, 0.7, -1.9}) CHECK(transpose_twirl_identity(cx, {"B"}, t) <= 1e-12);
}

TEST_CASE("cq operators") {
  Rng rng(60);
  CqOperator x;
  x.layout = lay({"A", "K"}, {2, 2});
  x.classical = "K";
  const Mat u = random_unitary(2, rng);
  x.basis = {u.col(0), u.col(1)};
  x.blocks = {state(lay({"A"}, {2}), 61).mat(), state(lay({"A"}, {2}), 62).mat() * 2.0};
  x.validate();
  const Mat full = x.assemble();
  CHECK(max_abs(x.power(Complex(1.0, 0.0)) - full) <= 1e-12);
  CHECK(max_abs(x.power(Complex(0.5, 0.0)) - sqrt_psd(full)) <= 1e-10);
  CqOperator bad = x;
  bad.basis[1] = bad.basis[0];
  CHECK_THROWS_AS(bad.validate(), CertificateError);
  bad = x;
  bad.blocks[0] = -bad.blocks[0];
  CHECK_THROWS_AS(bad.validate(), CertificateError);
}

TEST_CASE("gamma construction against the double sum") {
  Rng rng(70);
  // X on [A, B'] classical on B' (dim 4 = B⊗B with B of dim 2); map C → B'C.
  const LabeledOperator rho_bpc = state(lay({"Bp", "C"}, {4, 2}), 71, 5);
  const SeparableDecomposition sigma = random_separable(lay({"C", "A"}, {2, 2}), {{"C"}, {"A"}}, 3, 72);
  CqOperator x;
  x.layout = lay({"A", "Bp"}, {2, 4});
  x.classical = "Bp";
  const Mat u = random_unitary(4, rng);
  for (int k = 0; k < 4; ++k) {
    x.basis.push_back(u.col(k));
    x.blocks.push_back(state(lay({"A"}, {2}), 80 + k).mat() * (0.5 + k));
  }
  const QuadratureRule rule = beta0_rule(21, 4.0);
  const SqGamma g = gamma_construction(rho_bpc, {"C"}, sigma, x, rule, true);
  const LabeledOperator oracle = gamma_numerator_double_sum(rho_bpc, {"C"}, sigma.assemble(), x, rule);
  CHECK(g.numerator.layout().labels() == oracle.layout().labels());
  CHECK(max_abs(g.numerator.mat() - oracle.mat()) <= 1e-12);
  CHECK(std::abs(g.gamma_hat.trace().real() - 1.0) <= 1e-12);
  CHECK(g.gamma_x.layout() == x.layout);

  // γ_x directly from the averaged map.
  const LabeledOperator gam = averaged_recover({PetzFamily(rho_bpc, {"C"})}, rule, sigma.assemble());
  CHECK(max_abs(reorder(partial_trace(gam, {"C"}), {"A", "Bp"}).mat() - g.gamma_x.mat()) <= 1e-12);

  REQUIRE(g.dec_x.has_value());
  REQUIRE(g.dec_hat.has_value());
  g.dec_x->validate();
  g.dec_hat->validate();
  const Mat gx = g.gamma_x.mat() / g.gamma_x.trace();
  CHECK(max_abs(reorder(g.dec_x->assemble(), {"A", "Bp"}).mat() - gx) <= 1e-10);
  CHECK(max_abs(reorder(g.dec_hat->assemble(), g.gamma_hat.layout().labels()).mat() - g.gamma_hat.mat()) <= 1e-10);
}

TEST_CASE("cemi gamma and its certificate") {
  const LabeledOperator a1 = state(lay({"A1b", "A1"}, {2, 2}), 90);
  const LabeledOperator a2 = state(lay({"A2b", "A2"}, {2, 2}), 91);
  const RecoveryPlan maps{PetzFamily(a1, {"A1b"}), PetzFamily(a2, {"A2b"})};
  const SeparableDecomposition sigma = random_separable(lay({"A1b", "A2b"}, {2, 2}), {{"A1b"}, {"A2b"}}, 3, 92);
  Rng rng(93);
  std::vector<double> xw{0.3, 0.7};
  std::vector<std::vector<CVec>> xf{{unit(2, rng), unit(2, rng)}, {unit(2, rng), unit(2, rng)}};
  Mat xm = Mat::Zero(4, 4);
  for (int j = 0; j < 2; ++j) {
    const CVec v = kron(xf[j][0], xf[j][1]);
    xm += xw[j] * v * v.adjoint();
  }
  const QuadratureRule rule = beta0_rule(15, 3.0);
  const CemiGamma g = cemi_gamma(maps, sigma.assemble(), LabeledOperator(lay({"A1", "A2"}, {2, 2}), xm), rule);
  CHECK(std::abs(g.gamma_hat.trace().real() - 1.0) <= 1e-12);
  CHECK(min_eigenvalue(g.gamma_hat.mat()) >= -1e-12);
  const SeparableDecomposition dec = cemi_gamma_hat_decomposition(maps, sigma, xw, xf, rule);
  dec.validate();
  CHECK(max_abs(reorder(dec.assemble(), g.gamma_hat.layout().labels()).mat() - g.gamma_hat.mat()) <= 1e-10);
  CHECK_THROWS_AS(cemi_gamma(maps, sigma.assemble(), LabeledOperator(lay({"A1"}, {2}), Mat::Identity(2, 2)), rule),
                  CompositionError);
}
