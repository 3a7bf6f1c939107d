#pragma once

// Dense complex linear algebra helpers shared by every module. Everything
// here works on plain Eigen matrices; the labeled layer lives in linop.hpp.

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <vector>

namespace entlab {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

/// Relative threshold below which eigenvalues count as zero.
inline constexpr double kSupportRelTol = 1e-10;

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(max_abs(m), 1e-300);
  return max_abs(m - m.adjoint()) <= rel_tol * scale;
}

template <typename Derived>
Mat hermitian_part(const Eigen::MatrixBase<Derived>& m) {
  return (0.5 * (m + m.adjoint())).eval();
}

template <typename A, typename B>
Mat kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CVec kron(const CVec& a, const CVec& b) {
  CVec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
struct Eigensystem {
  RVec values;
  Mat vectors;

  Eigen::Index dim() const { return values.size(); }
  double max_abs_value() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
  /// Eigenvalues at or below this are treated as zero.
  double support_cutoff() const { return kSupportRelTol * max_abs_value(); }
};

Eigensystem eigh(const Mat& h);

/// V f(Λ) V† for a scalar function applied on the spectrum.
template <typename F>
Mat apply_spectral(const Eigensystem& es, F&& f) {
  const Eigen::Index n = es.dim();
  Eigen::VectorXcd fv(n);
  for (Eigen::Index i = 0; i < n; ++i) fv(i) = Complex(f(es.values(i)));
  return es.vectors * fv.asDiagonal() * es.vectors.adjoint();
}

/// log on the support; kernel maps to zero.
Mat log_on_support(const Eigensystem& es);
Mat log_on_support(const Mat& h);
Mat exp_hermitian(const Mat& h);
/// x^z on the support for complex z; kernel maps to zero (generalized inverse for Re z < 0).
Mat power_on_support(const Eigensystem& es, Complex z);
Mat power_on_support(const Mat& h, Complex z);
Mat sqrt_psd(const Mat& h);
/// Projector onto the support of a PSD matrix.
Mat support_projector(const Eigensystem& es);

/// Fréchet derivative of log at ω (given by its eigensystem) in direction h:
/// Daleckii–Krein kernel with first divided differences of log.
Mat log_derivative(const Eigensystem& omega, const Mat& h);

/// Spectral projectors of a Hermitian matrix, eigenvalues clustered when their
/// gap is below rel_gap·max|λ| (absolute floor 1e-300).
std::vector<Mat> spectral_projectors(const Eigensystem& es, double rel_gap);
int count_distinct(const RVec& ascending_values, double rel_gap);

double trace_norm(const Mat& m);
/// F(ρ,σ) = ‖√ρ√σ‖₁².
double fidelity(const Mat& rho, const Mat& sigma);
/// Schatten p-norm, p ≥ 1.
double schatten_norm(const Mat& m, double p);

/// Minimum eigenvalue of the Hermitian part.
double min_eigenvalue(const Mat& h);

/// Haar-random unitary from QR of a complex Ginibre matrix.
template <typename Rng>
Mat random_unitary(Eigen::Index d, Rng& rng) {
  Mat g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR();
  for (Eigen::Index j = 0; j < d; ++j) {
    const Complex diag = r(j, j);
    const double a = std::abs(diag);
    if (a > 0) q.col(j) *= diag / a;
  }
  return q;
}

}  // namespace entlab
