#include <doctest.h>

#include <cmath>
#include <numbers>

#include "entlab/entmeasures.hpp"
#include "entlab/entropy.hpp"
#include "entlab/linop.hpp"
#include "entlab/optim.hpp"
#include "entlab/random.hpp"

using namespace entlab;

namespace {

const SystemLayout kQubits({"A", "B"}, {2, 2});

LabeledOperator bell() {
  CVec v = CVec::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return {kQubits, v * v.adjoint()};
}

LabeledOperator random_state(const SystemLayout& l, std::uint64_t seed) {
  Rng rng(seed);
  return ginibre_state(l, rng).op();
}

CVec bloch(double th, double ph) {
  CVec v(2);
  v << std::cos(th / 2), std::polar(std::sin(th / 2), ph);
  return v;
}

EntOptions quick() {
  EntOptions o;
  o.restarts = 2;
  o.iterations = 150;
  o.outer = 3;
  return o;
}

}  // namespace

TEST_CASE("ree of the Bell state against a product-overlap grid") {
  const LabeledOperator b = bell();
  const EntMeasureValue e = ree(b, {{"A"}, {"B"}});
  CHECK(std::abs(e.value - std::log(2.0)) <= 2e-3);
  // D(ψ‖σ) ≥ −log⟨ψ|σ|ψ⟩ ≥ −log max_{product s} |⟨ψ|s⟩|², with the max on a grid.
  CVec psi = CVec::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  double best = 0.0;
  const int n = 24;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k <= n; ++k)
        for (int l = 0; l < n; ++l) {
          const CVec s = kron(bloch(std::numbers::pi * i / n, 2 * std::numbers::pi * j / n),
                              bloch(std::numbers::pi * k / n, 2 * std::numbers::pi * l / n));
          best = std::max(best, std::norm(psi.dot(s)));
        }
  CHECK(best == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(e.value >= -std::log(best) - 1e-6);
  REQUIRE(e.sigma_sep.has_value());
  e.sigma_sep->validate();
  CHECK(std::abs(umegaki(b.mat(), e.sigma.mat()).value - e.value) <= 1e-8);
}

TEST_CASE("ree vanishes on separable inputs and respects local unitaries") {
  Rng rng(3);
  const SeparableDecomposition s = separable_mixture(kQubits, {{"A"}, {"B"}}, 4, rng);
  const EntMeasureValue e = ree(s.assemble(), {{"A"}, {"B"}});
  CHECK(e.value <= 1e-4);

  const LabeledOperator r = random_state(kQubits, 4);
  const Mat u = kron(random_unitary(2, rng), random_unitary(2, rng));
  const LabeledOperator ru(kQubits, u * r.mat() * u.adjoint());
  const double e1 = ree(r, {{"A"}, {"B"}}).value, e2 = ree(ru, {{"A"}, {"B"}}).value;
  CHECK(std::abs(e1 - e2) <= 2e-3);
}

TEST_CASE("ree agrees with the PPT relaxation on two qubits") {
  // Two-qubit PPT states are separable, so both minimizations share the optimum.
  for (std::uint64_t seed : {10, 11, 12}) {
    const LabeledOperator r = random_state(kQubits, seed);
    const EntMeasureValue e = ree(r, {{"A"}, {"B"}});
    const EntMeasureValue p = ppt_ree(r, {{"B"}}, {}, &e.sigma);
    CHECK(p.value <= e.value + 1e-6);
    CHECK(std::abs(p.value - e.value) <= 1e-5);
    CHECK(e.lower_estimate <= e.value);
    CHECK(min_ppt_eigenvalue(p.sigma.mat(), {2, 2}, {{1}}) >= -1e-9);
    CHECK(std::abs(umegaki(r.mat(), p.sigma.mat()).value - p.value) <= 1e-8);
    CHECK(std::abs(umegaki(r.mat(), e.sigma.mat()).value - e.value) <= 1e-8);
  }
}

TEST_CASE("ppt_ree from a cold start") {
  Rng rng(20);
  const LabeledOperator ppt = ppt_state(kQubits, {"B"}, rng).op();
  CHECK(ppt_ree(ppt, {{"B"}}).value <= 1e-4);
  const EntMeasureValue pb = ppt_ree(bell(), {{"B"}});
  CHECK(pb.value <= std::log(2.0) + 1e-3);
  CHECK(pb.value >= std::log(2.0) - 1e-3);
}

TEST_CASE("measured chain ordering") {
  const EntOptions o = quick();
  for (std::uint64_t seed : {30, 31}) {
    const LabeledOperator r = random_state(kQubits, seed);
    const EntMeasuredChain ch = ree_measured_chain(r, {"A"}, o);
    CHECK(ch.all.value <= ch.e.value + 1e-10);
    CHECK(ch.locc1.value <= ch.all.value + 1e-10);
    CHECK(ch.lo.value <= ch.locc1.value + 1e-10);
    CHECK(ch.lo.value >= -1e-12);
    REQUIRE(ch.all.inner.has_value());
    CHECK(std::abs(d_all(r, ch.all.sigma).value - ch.all.value) <= 1e-6);
  }
  Rng rng(32);
  const SeparableDecomposition s = separable_mixture(kQubits, {{"A"}, {"B"}}, 3, rng);
  const EntMeasuredChain sep = ree_measured_chain(s.assemble(), {"A"}, o);
  CHECK(sep.e.value <= 1e-4);
  CHECK(sep.all.value <= 1e-4);
  const EntMeasureValue b = ree_measured(bell(), {"A"}, MeasClass::All, o);
  CHECK(b.value <= std::log(2.0) + 2e-3);
}

TEST_CASE("cone-class measured ree stays below ree") {
  EntOptions o = quick();
  o.outer = 2;
  o.cone.iterations = 30;
  const LabeledOperator r = random_state(kQubits, 40);
  const double e = ree(r, {{"A"}, {"B"}}, o).value;
  for (MeasClass c : {MeasClass::SEPP, MeasClass::PPT}) {
    const EntMeasureValue v = ree_measured(r, {"A"}, c, o);
    CHECK(v.value <= e + 1e-6);
    CHECK(v.value >= -1e-9);
  }
}

TEST_CASE("tripartite ree") {
  const SystemLayout l({"A", "B", "C"}, {2, 2, 2});
  const LabeledOperator prod =
      tensor(tensor(random_state(SystemLayout({"A"}, {2}), 50), random_state(SystemLayout({"B"}, {2}), 51)),
             random_state(SystemLayout({"C"}, {2}), 52));
  CHECK(ree3(prod, {"A"}, {"B"}, {"C"}, Ree3Class::Exact, quick()).value <= 1e-4);
  CVec g = CVec::Zero(8);
  g(0) = g(7) = 1.0 / std::sqrt(2.0);
  const LabeledOperator ghz(l, g * g.adjoint());
  const EntMeasureValue e3 = ree3(ghz, {"A"}, {"B"}, {"C"}, Ree3Class::Exact, quick());
  CHECK(e3.value <= umegaki(ghz.mat(), Mat::Identity(8, 8) / 8.0).value + 1e-8);
  CHECK(std::abs(e3.value - std::log(2.0)) <= 2e-3);
  const LabeledOperator r = random_state(l, 53);
  const double e_ab = ree(marginal(r, {"A", "B"}), {{"A"}, {"B"}}, quick()).value;
  CHECK(ree3(r, {"A"}, {"B"}, {"C"}, Ree3Class::Exact, quick()).value >= e_ab - 1e-4);
  EntOptions o = quick();
  o.outer = 2;
  CHECK(ree3(r, {"A"}, {"B"}, {"C"}, Ree3Class::All, o).value <=
        ree3(r, {"A"}, {"B"}, {"C"}, Ree3Class::Exact, o).value + 1e-6);
}

TEST_CASE("two copies are subadditive") {
  const LabeledOperator r = random_state(kQubits, 60);
  const double e1 = ree(r, {{"A"}, {"B"}}).value;
  const LabeledOperator two = tensor_power(r, 2);
  EntOptions o;
  o.restarts = 1;
  o.iterations = 60;
  const double e2 = ree(two, {{"A1", "A2"}, {"B1", "B2"}}, o).value;
  CHECK(e2 <= 2 * e1 + 1e-3);
}

TEST_CASE("extension-based squashed and CEMI values") {
  Rng rng(70);
  const SeparableDecomposition s = separable_mixture(kQubits, {{"A"}, {"B"}}, 3, rng);
  ExtensionOptions eo;
  eo.separable = &s;
  CHECK(squashed_upper(s.assemble(), {"A"}, {"B"}, eo).value <= 1e-6);
  CHECK(cemi_upper(s.assemble(), {"A"}, {"B"}, eo).value <= 1e-6);

  const LabeledOperator prod = tensor(random_state(SystemLayout({"A"}, {2}), 71), random_state(SystemLayout({"B"}, {2}), 72));
  CHECK(std::abs(squashed_upper(prod, {"A"}, {"B"}).value) <= 1e-9);

  const ExtensionValue sb = squashed_upper(bell(), {"A"}, {"B"});
  CHECK(sb.value >= 0.5 * std::log(2.0) - 1e-3);
  for (std::uint64_t seed : {73, 74}) {
    const LabeledOperator r = random_state(kQubits, seed);
    ExtensionOptions o;
    o.seed = seed;
    const double sq = squashed_upper(r, {"A"}, {"B"}, o).value;
    const double ce = cemi_upper(r, {"A"}, {"B"}, o).value;
    CHECK(sq >= -1e-9);
    CHECK(ce >= sq - 1e-4);
  }
}
