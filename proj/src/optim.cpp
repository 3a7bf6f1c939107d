#include "entlab/optim.hpp"

#include <cmath>
#include <limits>

#include "entlab/linop.hpp"

namespace entlab {

namespace {

constexpr double kTiny = 1e-300;

const ColumnFamily& family_of(const std::vector<ColumnFamily>& f, Eigen::Index i) {
  return f.size() == 1 ? f[0] : f[static_cast<std::size_t>(i)];
}

double column_term(const CVec& u, const ColumnFamily& fam) {
  double acc = 0.0;
  for (std::size_t z = 0; z < fam.r.size(); ++z) {
    const double p = std::max((u.adjoint() * fam.r[z] * u)(0, 0).real(), 0.0);
    const double q = std::max((u.adjoint() * fam.s[z] * u)(0, 0).real(), 0.0);
    if (p <= kTiny) continue;
    if (q <= kTiny) return std::numeric_limits<double>::infinity();
    acc += p * std::log(p / q);
  }
  return acc;
}

// exp(sΩ) for anti-Hermitian Ω via the Hermitian matrix iΩ.
Mat exp_antihermitian(const Eigensystem& es, double s) {
  const Eigen::Index n = es.dim();
  CVec phase(n);
  for (Eigen::Index k = 0; k < n; ++k) phase(k) = std::exp(Complex(0.0, -s * es.values(k)));
  return es.vectors * phase.asDiagonal() * es.vectors.adjoint();
}

Mat reorthonormalize(const Mat& u) {
  Eigen::HouseholderQR<Mat> qr(u);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR();
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

}  // namespace

double column_objective(const Mat& u, const std::vector<ColumnFamily>& families) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < u.cols(); ++i) acc += column_term(u.col(i), family_of(families, i));
  return acc;
}

AscentResult ascend_columns(Mat u, const std::vector<ColumnFamily>& families, int max_iter, double tol) {
  const Eigen::Index n = u.cols();
  AscentResult res;
  double value = column_objective(u, families);
  double step = 1.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    Mat w = Mat::Zero(u.rows(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const ColumnFamily& fam = family_of(families, i);
      const CVec ui = u.col(i);
      for (std::size_t z = 0; z < fam.r.size(); ++z) {
        const CVec ru = fam.r[z] * ui, su = fam.s[z] * ui;
        const double p = std::max(ui.dot(ru).real(), kTiny);
        const double q = std::max(ui.dot(su).real(), kTiny);
        w.col(i) += (std::log(p / q) + 1.0) * ru - (p / q) * su;
      }
    }
    const Mat a = u.adjoint() * w;
    const Mat omega = 0.5 * (a - a.adjoint());
    const double g2 = omega.squaredNorm();
    if (g2 < 1e-28) {
      res.converged = true;
      break;
    }
    const Eigensystem es = eigh(Complex(0.0, 1.0) * omega);
    // Armijo: accept when gain ≥ 1e-4·s·2‖Ω‖².
    step = std::min(step * 2.0, 1e3);
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Mat cand = u * exp_antihermitian(es, step);
      const double v = column_objective(cand, families);
      if (std::isfinite(v) && v >= value + 1e-4 * step * 2.0 * g2) {
        const double gain = v - value;
        u = cand;
        value = v;
        accepted = true;
        if (gain <= tol * std::max(1.0, std::abs(value))) {
          res.converged = true;
        }
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = true;
      break;
    }
    if ((it + 1) % 25 == 0) {
      u = reorthonormalize(u);
      value = column_objective(u, families);
    }
    if (res.converged) break;
  }
  res.u = reorthonormalize(u);
  res.value = column_objective(res.u, families);
  res.iterations = it;
  return res;
}

CVec kron_all(const std::vector<CVec>& factors) {
  CVec out = CVec::Ones(1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

namespace {

// D×d_j embedding s₁⊗…⊗I_{d_j}⊗…⊗s_m.
Mat slot_embedding(const std::vector<CVec>& factors, std::size_t j) {
  Mat e = Mat::Ones(1, 1);
  for (std::size_t k = 0; k < factors.size(); ++k) {
    if (k == j) {
      const Eigen::Index d = factors[k].size();
      e = kron(e, Mat::Identity(d, d));
    } else {
      e = kron(e, Mat(factors[k]));
    }
  }
  return e;
}

// Top generalized eigenvector of (m, n), n positive definite.
CVec top_generalized(const Mat& m, const Mat* n) {
  if (n == nullptr) {
    const Eigensystem es = eigh(m);
    return es.vectors.col(es.dim() - 1);
  }
  Eigen::LLT<Mat> llt(hermitian_part(*n));
  if (llt.info() != Eigen::Success) {
    const Eigensystem es = eigh(m);
    return es.vectors.col(es.dim() - 1);
  }
  const Mat l = llt.matrixL();
  const Mat linv = l.triangularView<Eigen::Lower>().solve(Mat::Identity(l.rows(), l.cols()));
  const Eigensystem es = eigh(linv * m * linv.adjoint());
  CVec v = linv.adjoint() * es.vectors.col(es.dim() - 1);
  return v / v.norm();
}

double ratio(const CVec& s, const Mat& g, const Mat* n) {
  const double num = s.dot(g * s).real();
  if (n == nullptr) return num;
  return num / std::max(s.dot(*n * s).real(), kTiny);
}

}  // namespace

ProductVector best_product_vector(const Mat& g, const Mat* n, const std::vector<int>& dims, Rng& rng,
                                  int starts, const std::vector<std::vector<CVec>>& seeds) {
  ProductVector best;
  best.value = -std::numeric_limits<double>::infinity();
  const int total = static_cast<int>(seeds.size()) + starts;
  for (int st = 0; st < total; ++st) {
    std::vector<CVec> f;
    if (st < static_cast<int>(seeds.size())) {
      f = seeds[st];
    } else {
      for (int d : dims) f.push_back(random_unit_vector(d, rng));
    }
    double value = ratio(kron_all(f), g, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
      const double before = value;
      for (std::size_t j = 0; j < f.size(); ++j) {
        if (f[j].size() == 1) continue;
        const Mat e = slot_embedding(f, j);
        const Mat mj = e.adjoint() * g * e;
        if (n != nullptr) {
          const Mat nj = e.adjoint() * *n * e;
          f[j] = top_generalized(mj, &nj);
        } else {
          f[j] = top_generalized(mj, nullptr);
        }
      }
      value = ratio(kron_all(f), g, n);
      if (value - before <= 1e-13 * std::max(1.0, std::abs(value))) break;
    }
    if (value > best.value) {
      best.value = value;
      best.factors = f;
    }
  }
  best.vec = kron_all(best.factors);
  return best;
}

Mat psd_part(const Mat& h) {
  return apply_spectral(eigh(h), [](double x) { return x > 0.0 ? x : 0.0; });
}

double min_ppt_eigenvalue(const Mat& x, const std::vector<int>& dims,
                          const std::vector<std::vector<int>>& transposes) {
  double m = min_eigenvalue(x);
  for (const auto& t : transposes) m = std::min(m, min_eigenvalue(partial_transpose_mat(x, dims, t)));
  return m;
}

Mat dykstra_project(const Mat& x0, const ProjectionSpec& spec) {
  const std::size_t sets = 1 + spec.transposes.size() + (spec.affine ? 1 : 0);
  std::vector<Mat> incr(sets, Mat::Zero(x0.rows(), x0.cols()));
  Mat x = hermitian_part(x0);
  const double cnorm2 = spec.affine ? spec.affine->squaredNorm() : 1.0;
  auto project = [&](std::size_t k, const Mat& y) -> Mat {
    if (k == 0) return psd_part(y);
    if (k <= spec.transposes.size()) {
      const auto& t = spec.transposes[k - 1];
      return partial_transpose_mat(psd_part(partial_transpose_mat(y, spec.dims, t)), spec.dims, t);
    }
    const double v = (*spec.affine * y).trace().real();
    return y - ((v - spec.affine_value) / cnorm2) * *spec.affine;
  };
  for (int it = 0; it < spec.max_iter; ++it) {
    const Mat start = x;
    for (std::size_t k = 0; k < sets; ++k) {
      const Mat y = x + incr[k];
      const Mat p = hermitian_part(project(k, y));
      incr[k] = y - p;
      x = p;
    }
    if ((x - start).norm() <= spec.tol * std::max(1.0, x.norm())) {
      bool feasible = min_ppt_eigenvalue(x, spec.dims, spec.transposes) >= -spec.tol;
      if (spec.affine)
        feasible = feasible && std::abs((*spec.affine * x).trace().real() - spec.affine_value) <= spec.tol;
      if (feasible) break;
    }
  }
  return x;
}

}  // namespace entlab
