#include "entlab/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

#include "entlab/errors.hpp"

namespace entlab {

Eigensystem eigh(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(hermitian_part(h));
  if (solver.info() != Eigen::Success) throw DomainError("eigh: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

namespace {

void require_psd(const Eigensystem& es, const char* what) {
  if (es.dim() == 0) return;
  const double floor = -kSupportRelTol * std::max(es.max_abs_value(), 1.0);
  if (es.values(0) < floor)
    throw DomainError(std::string(what) + ": negative eigenvalue " + std::to_string(es.values(0)));
}

}  // namespace

Mat log_on_support(const Eigensystem& es) {
  require_psd(es, "log_on_support");
  const double cut = es.support_cutoff();
  return apply_spectral(es, [cut](double x) { return x > cut ? std::log(x) : 0.0; });
}

Mat log_on_support(const Mat& h) { return log_on_support(eigh(h)); }

Mat exp_hermitian(const Mat& h) {
  return apply_spectral(eigh(h), [](double x) { return std::exp(x); });
}

Mat power_on_support(const Eigensystem& es, Complex z) {
  require_psd(es, "power_on_support");
  const double cut = es.support_cutoff();
  const Eigen::Index n = es.dim();
  CVec fv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = es.values(i);
    fv(i) = x > cut ? std::exp(z * std::log(x)) : Complex(0.0);
  }
  return es.vectors * fv.asDiagonal() * es.vectors.adjoint();
}

Mat power_on_support(const Mat& h, Complex z) { return power_on_support(eigh(h), z); }

Mat sqrt_psd(const Mat& h) {
  const Eigensystem es = eigh(h);
  return apply_spectral(es, [](double x) { return x > 0 ? std::sqrt(x) : 0.0; });
}

Mat support_projector(const Eigensystem& es) {
  const double cut = es.support_cutoff();
  return apply_spectral(es, [cut](double x) { return x > cut ? 1.0 : 0.0; });
}

Mat log_derivative(const Eigensystem& omega, const Mat& h) {
  const Eigen::Index n = omega.dim();
  const RVec& l = omega.values;
  Mat k = omega.vectors.adjoint() * h * omega.vectors;
  const double scale = omega.max_abs_value();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = l(i), b = l(j);
      double dd;
      if (std::abs(a - b) <= 1e-12 * scale) {
        dd = 2.0 / (a + b);
      } else if (std::abs(a - b) < 1e-3 * std::max(a, b)) {
        dd = std::log1p((a - b) / b) / (a - b);
      } else {
        dd = (std::log(a) - std::log(b)) / (a - b);
      }
      k(i, j) *= dd;
    }
  }
  return omega.vectors * k * omega.vectors.adjoint();
}

namespace {

template <typename Emit>
void cluster(const RVec& v, double rel_gap, Emit&& emit) {
  const Eigen::Index n = v.size();
  if (n == 0) return;
  const double scale = std::max(v.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (i == n || v(i) - v(i - 1) > rel_gap * scale) {
      emit(start, i);
      start = i;
    }
  }
}

}  // namespace

std::vector<Mat> spectral_projectors(const Eigensystem& es, double rel_gap) {
  std::vector<Mat> out;
  cluster(es.values, rel_gap, [&](Eigen::Index b, Eigen::Index e) {
    const auto cols = es.vectors.middleCols(b, e - b);
    out.push_back(cols * cols.adjoint());
  });
  return out;
}

int count_distinct(const RVec& ascending_values, double rel_gap) {
  int count = 0;
  cluster(ascending_values, rel_gap, [&](Eigen::Index, Eigen::Index) { ++count; });
  return count;
}

double trace_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().sum();
}

double fidelity(const Mat& rho, const Mat& sigma) {
  const double f = trace_norm(sqrt_psd(rho) * sqrt_psd(sigma));
  return f * f;
}

double schatten_norm(const Mat& m, double p) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  const RVec s = svd.singularValues();
  if (std::isinf(p)) return s.maxCoeff();
  const double top = s.maxCoeff();
  if (top == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) acc += std::pow(s(i) / top, p);
  return top * std::pow(acc, 1.0 / p);
}

double min_eigenvalue(const Mat& h) { return eigh(h).values(0); }

}  // namespace entlab
