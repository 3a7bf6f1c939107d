#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "entlab/io.hpp"
#include "entlab/linop.hpp"
#include "entlab/random.hpp"

using namespace entlab;

namespace {

Mat random_mat(int d, std::uint64_t seed) {
  Rng rng(seed);
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.complex_normal();
  return m;
}

}  // namespace

TEST_CASE("partial trace matches an index loop") {
  const SystemLayout l({"A", "B", "C"}, {2, 3, 2});
  const Mat m = random_mat(12, 1);
  const LabeledOperator x(l, m);
  // tr_B by explicit indices: (a,c),(a',c') ← Σ_b m[(a,b,c),(a',b,c')].
  Mat oracle = Mat::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int c2 = 0; c2 < 2; ++c2)
          for (int b = 0; b < 3; ++b) oracle(a * 2 + c, a2 * 2 + c2) += m((a * 3 + b) * 2 + c, (a2 * 3 + b) * 2 + c2);
  const LabeledOperator y = partial_trace(x, {"B"});
  CHECK(y.layout().labels() == LabelSet{"A", "C"});
  CHECK(max_abs(y.mat() - oracle) <= 1e-13);
  CHECK(max_abs(marginal(x, {"C", "A"}).mat() - oracle) <= 1e-13);
  CHECK(std::abs(partial_trace(x, {"A", "B", "C"}).mat()(0, 0) - m.trace()) <= 1e-12);
}

TEST_CASE("partial transpose matches an index loop") {
  const SystemLayout l({"A", "B"}, {2, 3});
  const Mat m = random_mat(6, 2);
  Mat oracle(6, 6);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 3; ++b)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 3; ++b2) oracle(a * 3 + b, a2 * 3 + b2) = m(a * 3 + b2, a2 * 3 + b);
  CHECK(max_abs(partial_transpose(LabeledOperator(l, m), {"B"}).mat() - oracle) <= 1e-15);
  CHECK(max_abs(partial_transpose_mat(m, {2, 3}, {1}) - oracle) <= 1e-15);
  CHECK(max_abs(partial_transpose(LabeledOperator(l, m), {"A", "B"}).mat() - m.transpose()) <= 1e-15);
}

TEST_CASE("reorder, tensor and embed") {
  const LabeledOperator a(SystemLayout({"A"}, {2}), random_mat(2, 3));
  const LabeledOperator b(SystemLayout({"B"}, {3}), random_mat(3, 4));
  const LabeledOperator ab = tensor(a, b);
  CHECK(max_abs(ab.mat() - kron(a.mat(), b.mat())) <= 1e-15);
  const LabeledOperator ba = reorder(ab, {"B", "A"});
  CHECK(max_abs(ba.mat() - kron(b.mat(), a.mat())) <= 1e-14);
  CHECK(max_abs(reorder(ba, {"A", "B"}).mat() - ab.mat()) <= 1e-15);
  const SystemLayout t({"B", "C", "A"}, {3, 2, 2});
  const LabeledOperator e = embed(a, t);
  CHECK(max_abs(e.mat() - kron(kron(Mat::Identity(3, 3), Mat::Identity(2, 2)), a.mat())) <= 1e-15);
  CHECK_THROWS_AS(embed(a, SystemLayout({"A"}, {3})), LayoutError);
  CHECK_THROWS_AS(reorder(ab, {"A", "C"}), LayoutError);
  CHECK_THROWS_AS(SystemLayout({"A", "A"}, {2, 2}), LayoutError);
}

TEST_CASE("matrix functions on the support") {
  Rng rng(5);
  const QuantumState s = ginibre_state(SystemLayout({"A", "B"}, {2, 2}), rng, 2, 0.0);
  const LabeledOperator half = matfun(s.op(), MatFun::Power, 0.5);
  CHECK(max_abs(half.mat() * half.mat() - s.mat()) <= 1e-12);
  const LabeledOperator inv = matfun(s.op(), MatFun::Power, -1.0);
  // Generalized inverse: ρ ρ⁺ ρ = ρ.
  CHECK(max_abs(s.mat() * inv.mat() * s.mat() - s.mat()) <= 1e-10);
  const LabeledOperator lg = matfun(s.op(), MatFun::Log);
  CHECK(max_abs(matfun(lg, MatFun::Exp).mat() - s.mat() - (Mat::Identity(4, 4) - support_projector(eigh(s.mat())))) <=
        1e-10);
  const LabeledOperator neg(SystemLayout({"A"}, {2}), -Mat::Identity(2, 2));
  CHECK_THROWS_AS(matfun(neg, MatFun::Log), DomainError);
  CHECK_THROWS_AS(spectral(LabeledOperator(SystemLayout({"A"}, {2}), random_mat(2, 6))), ContractViolation);
}

TEST_CASE("pinching and tensor powers") {
  const Mat x = random_mat(4, 7);
  const Mat diag = Eigen::Vector4d(1, 2, 2, 3).cast<Complex>().asDiagonal();
  const Mat p = pinch(x, diag);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const bool same = std::abs(diag(i, i) - diag(j, j)) < 1e-12;
      CHECK(std::abs(p(i, j) - (same ? x(i, j) : Complex(0))) <= 1e-14);
    }
  const LabeledOperator a(SystemLayout({"A"}, {2}), random_mat(2, 8));
  const LabeledOperator a3 = tensor_power(a, 3);
  CHECK(a3.layout().labels() == LabelSet{"A1", "A2", "A3"});
  CHECK(max_abs(a3.mat() - kron(kron(a.mat(), a.mat()), a.mat())) <= 1e-14);
  CHECK(distinct_eigenvalues(LabeledOperator(SystemLayout({"A", "B"}, {2, 2}), diag)) == 3);
}

TEST_CASE("operator json round trip and validation") {
  Rng rng(9);
  const LabeledOperator s = ginibre_state(SystemLayout({"A", "B"}, {2, 2}), rng).op();
  const Json j = operator_to_json(s);
  const LabeledOperator back = operator_from_json(j);
  CHECK(back.layout() == s.layout());
  CHECK(max_abs(back.mat() - s.mat()) == 0.0);
  CHECK(digest_hex(j.dump()) == digest_hex(operator_to_json(back).dump()));
  Json bad = j;
  bad.erase("dims");
  CHECK_THROWS_WITH_AS(operator_from_json(bad), doctest::Contains("dims"), ContractViolation);
  const auto path = (std::filesystem::temp_directory_path() / "entlab_linop_test.json").string();
  write_json(path, j);
  CHECK(max_abs(read_operator(path).mat() - s.mat()) == 0.0);
  std::filesystem::remove(path);
}
