#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numbers>

#include "entlab/linop.hpp"
#include "entlab/optim.hpp"
#include "entlab/parallel.hpp"
#include "entlab/random.hpp"

using namespace entlab;

namespace {

CVec bloch(double th, double ph) {
  CVec v(2);
  v << std::cos(th / 2), std::polar(std::sin(th / 2), ph);
  return v;
}

}  // namespace

TEST_CASE("best product vector against a Bloch grid") {
  for (std::uint64_t seed : {1, 2, 3}) {
    Rng rng(seed);
    const Mat g = random_hermitian(4, 1.0, rng);
    const ProductVector pv = best_product_vector(g, nullptr, {2, 2}, rng, 10);
    double grid = -1e300;
    const int n = 30;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k <= n; ++k)
          for (int l = 0; l < n; ++l) {
            const CVec s = kron(bloch(std::numbers::pi * i / n, 2 * std::numbers::pi * j / n),
                                bloch(std::numbers::pi * k / n, 2 * std::numbers::pi * l / n));
            grid = std::max(grid, (s.adjoint() * g * s)(0, 0).real());
          }
    CHECK(pv.value >= grid - 1e-12);
    CHECK(pv.value <= grid + 5e-2);
    CHECK(std::abs((pv.vec.adjoint() * g * pv.vec)(0, 0).real() - pv.value) <= 1e-12);
    CHECK(std::abs(pv.vec.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("Dykstra projection onto the PSD trace-one set") {
  Rng rng(4);
  const Mat h = random_hermitian(4, 1.0, rng);
  const Mat id = Mat::Identity(4, 4);
  ProjectionSpec spec;
  spec.dims = {4};
  spec.affine = &id;
  spec.affine_value = 1.0;
  const Mat p = dykstra_project(h, spec);
  // Oracle: eigenvalues shifted by μ and clipped, with Σ max(λ−μ,0) = 1 (bisection on μ).
  const Eigensystem es = eigh(h);
  double lo = es.values.minCoeff() - 2, hi = es.values.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mu = 0.5 * (lo + hi);
    double s = 0;
    for (int i = 0; i < 4; ++i) s += std::max(es.values(i) - mu, 0.0);
    (s > 1 ? lo : hi) = mu;
  }
  const double mu = 0.5 * (lo + hi);
  const Mat oracle = apply_spectral(es, [mu](double v) { return std::max(v - mu, 0.0); });
  CHECK(max_abs(p - oracle) <= 1e-7);

  ProjectionSpec ppt = spec;
  ppt.dims = {2, 2};
  ppt.transposes = {{1}};
  const Mat q = dykstra_project(h, ppt);
  CHECK(min_ppt_eigenvalue(q, {2, 2}, {{1}}) >= -1e-8);
  CHECK(std::abs(q.trace().real() - 1.0) <= 1e-8);
}

TEST_CASE("column ascent never decreases its objective") {
  Rng rng(5);
  const QuantumState r = ginibre_state(SystemLayout({"A"}, {3}), rng);
  const QuantumState s = ginibre_state(SystemLayout({"A"}, {3}), rng);
  ColumnFamily fam;
  fam.r = {r.mat()};
  fam.s = {s.mat()};
  const Mat u0 = random_unitary(3, rng);
  const double v0 = column_objective(u0, {fam});
  const AscentResult a = ascend_columns(u0, {fam}, 200);
  CHECK(a.value >= v0 - 1e-14);
  CHECK(max_abs(Mat(a.u.adjoint() * a.u - Mat::Identity(3, 3))) <= 1e-10);
}

TEST_CASE("parallel_for covers every index once") {
  std::vector<std::atomic<int>> hits(257);
  parallel_for(257, [&](int i) { hits[i]++; }, 4);
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(8, [](int i) { if (i == 5) throw ParameterError("x"); }, 3), ParameterError);
  CHECK(thread_cap() >= 1);
}

TEST_CASE("samplers satisfy their contracts") {
  Rng rng(6);
  const SystemLayout l({"A", "B"}, {2, 3});
  const QuantumState g = ginibre_state(l, rng);
  CHECK(std::abs(g.mat().trace().real() - 1.0) <= 1e-12);
  CHECK(min_eigenvalue(g.mat()) > 0.0);
  const QuantumState pure = haar_pure(l, rng);
  CHECK(std::abs((pure.mat() * pure.mat()).trace().real() - 1.0) <= 1e-12);
  const SeparableDecomposition sep = separable_mixture(l, {{"A"}, {"B"}}, 5, rng);
  sep.validate();
  const QuantumState ppt = ppt_state(l, {"B"}, rng);
  CHECK(min_eigenvalue(partial_transpose(ppt.op(), {"B"}).mat()) >= -1e-12);
  const OneWayChannel ch = one_way_locc_channel(SystemLayout({"A", "B"}, {2, 2}), 3, 2, rng);
  const Mat id = Mat::Identity(4, 4);
  CHECK(max_abs(ch.adjoint(id) - id) <= 1e-10);
  CHECK(std::abs(ch.apply(g.mat().topLeftCorner(4, 4) / g.mat().topLeftCorner(4, 4).trace()).trace() - 1.0) <= 1e-10);
  Rng a(42, 7), b(42, 7), c(42, 8);
  const double x = a.uniform();
  CHECK(x == b.uniform());
  CHECK(x != c.uniform());
}
