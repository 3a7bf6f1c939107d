#include "doctest.h"

#include <cmath>

#include "entlab/entropy.hpp"
#include "entlab/linop.hpp"
#include "entlab/measured.hpp"
#include "entlab/random.hpp"

using namespace entlab;

namespace {

const SystemLayout kAB({"A", "B"}, {2, 2});

LabeledOperator op(const SystemLayout& l, const Mat& m) { return LabeledOperator(l, m); }

Mat diag_state(const std::vector<double>& p) {
  RVec v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v(i) = p[i];
  return v.cast<Complex>().asDiagonal();
}

// Projective qubit measurement along the Bloch direction (θ, φ).
double bloch_kl(const Mat& rho, const Mat& sigma, double th, double ph) {
  CVec u(2), v(2);
  u << std::cos(th / 2), std::exp(Complex(0, ph)) * std::sin(th / 2);
  v << -std::exp(Complex(0, -ph)) * std::sin(th / 2), std::cos(th / 2);
  double acc = 0.0;
  for (const CVec& w : {u, v}) {
    const double p = w.dot(rho * w).real(), q = w.dot(sigma * w).real();
    if (p > 0) acc += p * std::log(p / q);
  }
  return acc;
}

double grid_oracle(const Mat& rho, const Mat& sigma) {
  double best = 0.0;
  for (double th = 0.0; th <= M_PI + 1e-12; th += 0.01)
    for (double ph = 0.0; ph < 2 * M_PI; ph += 0.01) best = std::max(best, bloch_kl(rho, sigma, th, ph));
  return best;
}

SolverBudget light(std::uint64_t seed) {
  SolverBudget b;
  b.restarts = 8;
  b.seed = seed;
  return b;
}

}  // namespace

TEST_CASE("kl examples") {
  CHECK(kl({0.3, 0.7}, {0.3, 0.7}) == doctest::Approx(0.0));
  CHECK(kl({1.0, 0.0}, {0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(std::isinf(kl({0.5, 0.5}, {1.0, 0.0})));
  // Index-loop oracle.
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4}, q{0.25, 0.25, 0.25, 0.25};
  double ref = 0.0;
  for (int i = 0; i < 4; ++i) ref += p[i] * (std::log(p[i]) - std::log(q[i]));
  CHECK(kl(p, q) == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("d_all equals umegaki on commuting pairs") {
  Rng rng(11);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> p(4), q(4);
    double sp = 0, sq = 0;
    for (int i = 0; i < 4; ++i) sp += (p[i] = rng.uniform() + 0.05), sq += (q[i] = rng.uniform() + 0.05);
    for (int i = 0; i < 4; ++i) p[i] /= sp, q[i] /= sq;
    const Mat u = random_unitary(4, rng);
    const Mat rho = u * diag_state(p) * u.adjoint(), sigma = u * diag_state(q) * u.adjoint();
    const MeasuredValue mv = d_all(rho, sigma);
    CHECK(mv.value == doctest::Approx(kl(p, q)).epsilon(1e-6));
    CHECK(std::abs(evaluate(mv.witness, rho, sigma) - mv.value) <= 1e-9);
  }
}

TEST_CASE("d_all of identical states vanishes") {
  Rng rng(3);
  const QuantumState rho = ginibre_state(kAB, rng);
  CHECK(std::abs(d_all(rho.op(), rho.op()).value) <= 1e-9);
}

TEST_CASE("d_all matches the Bloch grid oracle on qubits") {
  const SystemLayout q({"Q"}, {2});
  for (int t = 0; t < 4; ++t) {
    Rng rng(100 + t);
    const Mat rho = ginibre_state(q, rng).mat(), sigma = ginibre_state(q, rng).mat();
    const MeasuredValue mv = d_all(rho, sigma);
    const double grid = grid_oracle(rho, sigma);
    CHECK(std::abs(mv.value - grid) <= 1e-4);
    CHECK(mv.value >= grid - 1e-9);
    CHECK(mv.value <= umegaki(rho, sigma).value + 1e-8);
    for (std::size_t k = 1; k < mv.trace.size(); ++k) CHECK(mv.trace[k] >= mv.trace[k - 1]);
  }
}

TEST_CASE("d_all flags support violations") {
  const Mat rho = diag_state({0.5, 0.5}), sigma = diag_state({1.0, 0.0});
  const MeasuredValue mv = d_all(rho, sigma);
  CHECK(std::isinf(mv.value));
  CHECK_FALSE(mv.support_ok);
}

TEST_CASE("d_pinch sandwich") {
  Rng rng(21);
  const QuantumState rho = ginibre_state(kAB, rng), sigma = ginibre_state(kAB, rng);
  const MeasuredValue p = d_pinch(rho.op(), sigma.op());
  const double d = umegaki(rho.op(), sigma.op()).value;
  CHECK(p.spec_count == 4);
  CHECK(p.value <= d + 1e-10);
  CHECK(p.value >= d - std::log(4.0) - 1e-10);
  CHECK(p.value <= d_all(rho.op(), sigma.op()).value + 1e-8);
  // Maximally mixed σ: pinching is lossless.
  const Mat pi = Mat::Identity(4, 4) / 4.0;
  CHECK(d_pinch(rho.mat(), pi).value == doctest::Approx(umegaki(rho.mat(), pi).value).epsilon(1e-10));
  // Two copies of qubit states.
  const SystemLayout q({"Q"}, {2});
  const QuantumState r1 = ginibre_state(q, rng), s1 = ginibre_state(q, rng);
  const LabeledOperator r2 = tensor_power(r1.op(), 2), s2 = tensor_power(s1.op(), 2);
  const MeasuredValue p2 = d_pinch(r2, s2);
  CHECK(p2.spec_count == 3);
  CHECK(p2.value >= 2 * umegaki(r1.op(), s1.op()).value - std::log(3.0) - 1e-10);
}

TEST_CASE("d_locc1 and d_lo reduce to kl on product-diagonal pairs") {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4}, q{0.4, 0.1, 0.2, 0.3};
  const auto rho = op(kAB, diag_state(p)), sigma = op(kAB, diag_state(q));
  CHECK(d_locc1(rho, sigma, {"A"}, light(1)).value == doctest::Approx(kl(p, q)).epsilon(1e-6));
  CHECK(d_lo(rho, sigma, {"A"}, light(1)).value == doctest::Approx(kl(p, q)).epsilon(1e-6));
  CHECK(std::abs(d_locc1(rho, rho, {"A"}, light(1)).value) <= 1e-9);
  CHECK(std::abs(d_lo(rho, rho, {"A"}, light(1)).value) <= 1e-9);
}

TEST_CASE("measured chain ordering and witness structure") {
  for (int t = 0; t < 3; ++t) {
    Rng rng(40 + t);
    const QuantumState rho = ginibre_state(kAB, rng), sigma = ginibre_state(kAB, rng);
    const MeasuredChain ch = measured_chain(rho.op(), sigma.op(), {"A"}, light(t));
    CHECK(ch.lo.value <= ch.locc1.value + 1e-9);
    CHECK(ch.locc1.value <= ch.all.value + 1e-9);
    CHECK(ch.all.value <= ch.umegaki + 1e-8);
    ch.lo.witness.validate();
    ch.locc1.witness.validate();
    CHECK(ch.locc1.witness.first_povm.size() <= 4);
    CHECK(std::abs(evaluate(ch.locc1.witness, rho.mat(), sigma.mat()) - ch.locc1.value) <= 1e-9);
  }
}

TEST_CASE("d_lo is invariant under local unitaries") {
  Rng rng(7);
  const QuantumState rho = ginibre_state(kAB, rng), sigma = ginibre_state(kAB, rng);
  const Mat u = kron(random_unitary(2, rng), random_unitary(2, rng));
  const double a = d_lo(rho.op(), sigma.op(), {"A"}, light(2)).value;
  const double b = d_lo(op(kAB, u * rho.mat() * u.adjoint()), op(kAB, u * sigma.mat() * u.adjoint()), {"A"},
                        light(3)).value;
  CHECK(std::abs(a - b) <= 1e-6);
}

TEST_CASE("split ordering: measuring B first") {
  Rng rng(8);
  const QuantumState rho = ginibre_state(kAB, rng), sigma = ginibre_state(kAB, rng);
  const MeasuredValue mv = d_locc1(rho.op(), sigma.op(), {"B"}, light(4));
  mv.witness.validate();
  CHECK(mv.witness.first == LabelSet{"B"});
  CHECK(std::abs(evaluate(mv.witness, rho.mat(), sigma.mat()) - mv.value) <= 1e-9);
}

TEST_CASE("cone bounds") {
  Rng rng(9);
  const QuantumState rho = ginibre_state(kAB, rng), sigma = ginibre_state(kAB, rng);
  const MeasuredValue lo = d_lo(rho.op(), sigma.op(), {"A"}, light(5));
  const ConeElement warm = lo_cone_element(lo.witness, rho.op(), sigma.op());
  CHECK(warm.check({2, 2}) <= 1e-10);
  CHECK(variational_value(rho.mat(), sigma.mat(), warm.op) >= lo.value - 1e-9);
  ConeOptions co;
  co.warm = &warm;
  const MeasuredValue sepp = cone_bound(rho.op(), sigma.op(), MeasClass::SEPP, {{"A"}, {"B"}}, co);
  CHECK(sepp.direction == Direction::Upper);
  CHECK(sepp.value >= lo.value - 1e-9);
  CHECK(sepp.cone->check({2, 2}) <= 1e-10);
  ConeOptions cp;
  cp.warm = &*sepp.cone;
  const MeasuredValue ppt = cone_bound(rho.op(), sigma.op(), MeasClass::PPT, {{"A"}, {"B"}}, cp);
  CHECK(ppt.value >= sepp.value - 1e-9);
  CHECK(ppt.cone->check({2, 2}, {{1}}) <= 1e-10);
  CHECK(ppt.value <= d_all(rho.op(), sigma.op()).value + 1e-6);
  // ρ = σ.
  CHECK(std::abs(cone_bound(rho.op(), rho.op(), MeasClass::SEPP, {{"A"}, {"B"}}).value) <= 1e-6);
  // Commuting separable pair: the computational atoms are feasible.
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4}, q{0.4, 0.1, 0.2, 0.3};
  const MeasuredValue c = cone_bound(op(kAB, diag_state(p)), op(kAB, diag_state(q)), MeasClass::SEPP, {{"A"}, {"B"}});
  CHECK(c.value >= kl(p, q) - 1e-6);
}

TEST_CASE("restricted fidelity and norm") {
  Rng rng(12);
  const QuantumState rho = ginibre_state(kAB, rng), sigma = ginibre_state(kAB, rng);
  const FidNorm same = restricted_fid_norm(rho.op(), rho.op(), MeasClass::All);
  CHECK(same.fidelity == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(same.norm <= 1e-10);
  const Mat e0 = diag_state({1, 0, 0, 0}), e1 = diag_state({0, 1, 0, 0});
  const FidNorm orth = restricted_fid_norm(op(kAB, e0), op(kAB, e1), MeasClass::All);
  CHECK(orth.fidelity <= 1e-12);
  CHECK(orth.norm == doctest::Approx(2.0));
  for (MeasClass m : {MeasClass::All, MeasClass::LO, MeasClass::LOCC1}) {
    const FidNorm f = restricted_fid_norm(rho.op(), sigma.op(), m, {"A"}, light(6));
    CHECK(f.divergence >= -std::log(f.fidelity) - 1e-7);
    CHECK(-std::log(f.fidelity) >= 0.25 * f.norm * f.norm - 1e-7);
  }
}

TEST_CASE("pullback through one-way LOCC channels reproduces statistics") {
  Rng rng(13);
  const QuantumState rho = ginibre_state(kAB, rng), sigma = ginibre_state(kAB, rng);
  const OneWayChannel g = one_way_locc_channel(kAB, 3, 2, rng);
  const Mat gr = g.apply(rho.mat()), gs = g.apply(sigma.mat());
  const MeasuredValue out = d_locc1(op(kAB, gr), op(kAB, gs), {"A"}, light(7));
  const Measurement back = pullback_locc1(out.witness, g);
  back.validate(1e-9);
  CHECK(std::abs(evaluate(back, rho.mat(), sigma.mat()) - out.value) <= 1e-9);
}

TEST_CASE("measurement validation rejects broken structure") {
  Measurement m;
  m.layout = kAB;
  m.elements = {Mat::Identity(4, 4) * 0.5};
  CHECK_THROWS_AS(m.validate(), ContractViolation);
  CHECK_THROWS_AS(meas_class_from_string("bogus"), ParameterError);
  CHECK(meas_class_from_string("locc1") == MeasClass::LOCC1);
}
