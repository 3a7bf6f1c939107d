#include "entlab/measured.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "entlab/entropy.hpp"
#include "entlab/linop.hpp"
#include "entlab/optim.hpp"
#include "entlab/parallel.hpp"

namespace entlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-300;

// Reorders a layout into [first, second] and back.
struct Split {
  SystemLayout original, ordered;
  LabelSet first, second;
  int da = 1, db = 1;

  Split(const SystemLayout& layout, const LabelSet& first_in) : original(layout) {
    require_labels(layout, first_in);
    first = layout.restricted_to(first_in).labels();
    second = layout.complement(first);
    if (first.empty() || second.empty()) throw LayoutError("split: both sides must be non-empty");
    LabelSet order = first;
    order.insert(order.end(), second.begin(), second.end());
    std::vector<int> dims;
    for (const auto& l : order) dims.push_back(layout.dim_of(l));
    ordered = SystemLayout(order, dims);
    da = layout.dim_of(first);
    db = layout.dim_of(second);
  }
  Mat to(const LabeledOperator& x) const { return reorder(x, ordered.labels()).mat(); }
  Mat back(const Mat& m) const { return reorder(LabeledOperator(ordered, m), original.labels()).mat(); }
};

void require_same_layout(const LabeledOperator& a, const LabeledOperator& b) {
  if (!(a.layout() == b.layout())) throw LayoutError("measured: ρ and σ live on different layouts");
}

std::vector<double> born_elems(const Mat& rho, const std::vector<Mat>& elems) {
  std::vector<double> p;
  p.reserve(elems.size());
  for (const Mat& e : elems) p.push_back(std::max((rho * e).trace().real(), 0.0));
  return p;
}

double kl_raw(const std::vector<double>& p, const std::vector<double>& q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInf;
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return acc;
}

// Σ r_z M^z with floored ratios, scaled so tr σω = 1.
Mat omega_from_elements(const std::vector<Mat>& elems, const Mat& rho, const Mat& sigma, double floor) {
  const auto p = born_elems(rho, elems), q = born_elems(sigma, elems);
  std::vector<double> r(elems.size(), 0.0);
  double rmax = 0.0;
  for (std::size_t z = 0; z < elems.size(); ++z) {
    r[z] = q[z] > kTiny ? p[z] / q[z] : (p[z] > 0.0 ? 1.0 / kTiny : 0.0);
    rmax = std::max(rmax, r[z]);
  }
  if (!(rmax > 0.0)) rmax = 1.0;
  Mat w = Mat::Zero(rho.rows(), rho.cols());
  for (std::size_t z = 0; z < elems.size(); ++z) w += std::max(r[z], floor * rmax) * elems[z];
  w = hermitian_part(w);
  const double s = (sigma * w).trace().real();
  if (s > kTiny) w /= s;
  return w;
}

std::vector<Mat> basis_elements(const Mat& u) {
  std::vector<Mat> out;
  out.reserve(u.cols());
  for (Eigen::Index k = 0; k < u.cols(); ++k) out.push_back(u.col(k) * u.col(k).adjoint());
  return out;
}

double basis_kl(const Mat& u, const Mat& rho, const Mat& sigma) {
  std::vector<double> p(u.cols()), q(u.cols());
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    p[k] = std::max(u.col(k).dot(rho * u.col(k)).real(), 0.0);
    q[k] = std::max(u.col(k).dot(sigma * u.col(k)).real(), 0.0);
  }
  return kl_raw(p, q);
}

// tr ρ log ω − log tr σω; −inf if ω is singular on supp ρ.
double variational_raw(const Mat& rho, const Mat& sigma, const Eigensystem& es_omega, const Mat& omega) {
  const double s = (sigma * omega).trace().real();
  if (!(s > 0.0)) return -kInf;
  const double cut = es_omega.support_cutoff();
  double acc = 0.0;
  const Mat rv = es_omega.vectors.adjoint() * rho * es_omega.vectors;
  for (Eigen::Index i = 0; i < es_omega.dim(); ++i) {
    const double w = rv(i, i).real();
    const double lam = es_omega.values(i);
    if (lam <= cut || lam <= 0.0) {
      if (w > 1e-14) return -kInf;
      continue;
    }
    acc += w * std::log(lam);
  }
  return acc - std::log(s);
}

Measurement projective(const SystemLayout& layout, const Mat& u) {
  Measurement m;
  m.cls = MeasClass::All;
  m.layout = layout;
  m.elements = basis_elements(u);
  return m;
}

Mat embed_vector_matrix(int d) {
  // V: C^d → C^d ⊗ C^d, |a⟩ ↦ |a⟩|0⟩.
  Mat v = Mat::Zero(d * d, d);
  for (int a = 0; a < d; ++a) v(a * d, a) = 1.0;
  return v;
}

CVec naimark_vector(const Mat& u, int x, int d) {
  CVec q(d);
  for (int a = 0; a < d; ++a) q(a) = u(a * d, x);
  return q;
}

// Clusters of an ascending spectrum, identical to count_distinct.
std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters(const RVec& v, double rel_gap) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  const Eigen::Index n = v.size();
  if (n == 0) return out;
  const double scale = std::max(v.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (i == n || v(i) - v(i - 1) > rel_gap * scale) {
      out.emplace_back(start, i);
      start = i;
    }
  }
  return out;
}

// σ eigenbasis refined by ρ inside each eigenspace.
Mat pinch_basis(const Mat& rho, const Mat& sigma, double rel_gap, int* count) {
  const Eigensystem es = eigh(sigma);
  Mat u(sigma.rows(), sigma.cols());
  const auto cl = clusters(es.values, rel_gap);
  for (const auto& [b, e] : cl) {
    const Mat cols = es.vectors.middleCols(b, e - b);
    const Eigensystem inner = eigh(hermitian_part(Mat(cols.adjoint() * rho * cols)));
    u.middleCols(b, e - b) = cols * inner.vectors;
  }
  if (count) *count = static_cast<int>(cl.size());
  return u;
}

struct DallCore {
  double value = 0.0;
  Mat basis;  // full unitary; columns are the measurement vectors
  bool support_ok = true;
  bool converged = false;
  int iterations = 0;
  std::vector<double> trace;
};

DallCore dall_core(const Mat& rho_in, const Mat& sigma_in, const DallOptions& o) {
  const Mat rho = hermitian_part(rho_in), sigma = hermitian_part(sigma_in);
  if (rho.rows() != sigma.rows() || rho.rows() != rho.cols())
    throw LayoutError("d_all: dimension mismatch");
  DallCore out;
  const Eigensystem es = eigh(sigma);
  const double cut = es.support_cutoff();
  std::vector<Eigen::Index> sup, ker;
  for (Eigen::Index i = 0; i < es.dim(); ++i) (es.values(i) > cut ? sup : ker).push_back(i);
  if (sup.empty()) throw ContractViolation("d_all: σ is zero");
  const Eigen::Index d = rho.rows(), ds = static_cast<Eigen::Index>(sup.size());
  Mat vs(d, ds), vk(d, d - ds);
  for (Eigen::Index i = 0; i < ds; ++i) vs.col(i) = es.vectors.col(sup[i]);
  for (Eigen::Index i = 0; i < d - ds; ++i) vk.col(i) = es.vectors.col(ker[i]);
  const double leak = (d - ds) ? (vk.adjoint() * rho * vk).trace().real() : 0.0;
  if (leak > 1e-12) {
    out.value = kInf;
    out.support_ok = false;
    out.basis = es.vectors;
    out.converged = true;
    return out;
  }
  const Mat rc = hermitian_part(Mat(vs.adjoint() * rho * vs));
  RVec lam(ds);
  for (Eigen::Index i = 0; i < ds; ++i) lam(i) = es.values(sup[i]);
  const Mat sc = lam.cast<Complex>().asDiagonal();
  const Mat s_inv = lam.cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal();
  const Mat s_half = lam.cwiseSqrt().cast<Complex>().asDiagonal();

  // Objective on normalized τ: ω = S τ S, tr σω = tr τ = 1.
  auto value_of = [&](const Mat& tau) {
    const Mat w = hermitian_part(Mat(s_inv * tau * s_inv));
    return variational_raw(rc, sc, eigh(w), w);
  };
  auto tau_of = [&](const Mat& omega_c) {
    Mat t = hermitian_part(Mat(s_half * omega_c * s_half));
    const double tr = t.trace().real();
    if (tr > kTiny) t /= tr;
    if (min_eigenvalue(t) <= 1e-14) t = (1.0 - 1e-10) * t + 1e-10 * Mat::Identity(ds, ds) / double(ds);
    return t;
  };

  std::vector<Mat> bases;
  Mat pinch = pinch_basis(rc, sc, 1e-8, nullptr);
  bases.push_back(pinch);
  {
    const Mat m = sqrt_psd(hermitian_part(Mat(s_half * rc * s_half)));
    bases.push_back(eigh(hermitian_part(Mat(s_inv * m * s_inv))).vectors);
  }
  Mat warm_c;
  if (o.warm_omega) {
    warm_c = hermitian_part(Mat(vs.adjoint() * *o.warm_omega * vs));
    bases.push_back(eigh(warm_c).vectors);
  }
  if (o.warm_basis) {
    const Mat wb = omega_from_elements(basis_elements(*o.warm_basis), rho, sigma, 1e-12);
    const Mat c = hermitian_part(Mat(vs.adjoint() * wb * vs));
    bases.push_back(eigh(c).vectors);
    if (!o.warm_omega) warm_c = c;
  }

  // Frank–Wolfe start: best of identity, warm and the basis omegas.
  Mat tau = sc / sc.trace().real();
  double val = value_of(tau);
  auto consider = [&](const Mat& t) {
    const double v = value_of(t);
    if (v > val) {
      tau = t;
      val = v;
    }
  };
  if (warm_c.size()) consider(tau_of(warm_c));
  for (const Mat& b : bases) consider(tau_of(omega_from_elements(basis_elements(b), rc, sc, 1e-12)));
  out.trace.push_back(val);

  bool fw_conv = false;
  int k = 0;
  for (; k < o.fw_iterations; ++k) {
    const Mat w = hermitian_part(Mat(s_inv * tau * s_inv));
    const Eigensystem ew = eigh(w);
    const Mat g = hermitian_part(Mat(s_inv * log_derivative(ew, rc) * s_inv));
    const Eigensystem eg = eigh(g);
    const CVec v = eg.vectors.col(eg.dim() - 1);
    const double gap = eg.values(eg.dim() - 1) - (g * tau).trace().real();
    if (gap <= o.gap_tol) {
      fw_conv = true;
      break;
    }
    double step = 2.0 / (k + 2.0);
    bool accepted = false;
    for (int h = 0; h < 30; ++h, step *= 0.5) {
      const Mat cand = (1.0 - step) * tau + step * (v * v.adjoint());
      const double cv = value_of(cand);
      if (cv > val) {
        tau = cand;
        val = cv;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      fw_conv = true;
      break;
    }
    out.trace.push_back(val);
  }
  out.iterations = k;
  bases.insert(bases.begin(), eigh(hermitian_part(Mat(s_inv * tau * s_inv))).vectors);

  // Polish: projective measurements are optimal, so ascend over bases.
  const std::vector<ColumnFamily> fam{ColumnFamily{{rc}, {sc}}};
  double best = -kInf;
  Mat best_u;
  bool pol_conv = false;
  for (const Mat& b : bases) {
    const AscentResult r = ascend_columns(b, fam, o.polish_iterations);
    const double v = std::max(r.value, column_objective(b, fam));
    const Mat& u = r.value >= column_objective(b, fam) ? r.u : b;
    if (v > best) {
      best = v;
      best_u = u;
      pol_conv = r.converged;
    }
  }
  Mat full(d, d);
  full.leftCols(ds) = vs * best_u;
  if (d > ds) full.rightCols(d - ds) = vk;
  out.basis = full;
  out.value = basis_kl(full, rho, sigma);
  out.converged = fw_conv || pol_conv;
  if (out.value > out.trace.back()) out.trace.push_back(out.value);
  return out;
}

MeasuredValue finish_dall(const SystemLayout& layout, const Mat& rho, const Mat& sigma, const DallCore& c) {
  MeasuredValue mv;
  mv.direction = Direction::Lower;
  mv.witness = projective(layout, c.basis);
  mv.value = c.support_ok ? evaluate(mv.witness, rho, sigma) : kInf;
  mv.support_ok = c.support_ok;
  mv.omega = c.support_ok ? variational_omega(mv.witness, rho, sigma) : Mat();
  mv.iterations = c.iterations;
  mv.converged = c.converged;
  mv.incomplete = !c.converged;
  mv.trace = c.trace;
  mv.upper_estimate = mv.value;
  return mv;
}

SystemLayout flat_layout(Eigen::Index d) { return SystemLayout({"X"}, {static_cast<int>(d)}); }

// ---------------------------------------------------------------- LOCC₁ ----

struct Locc1Core {
  double value = -kInf;
  Mat u;                         // Naimark unitary on A⊗A
  std::vector<Mat> cond;         // conditional bases on B, one per x
  int iterations = 0;
  bool converged = false;
};

struct Locc1Problem {
  Mat rho, sigma;
  int da, db;
  Mat v;  // embedding C^da → C^da ⊗ C^da
  DallOptions inner;
};

// Unnormalized conditional operators on B for the A-vector q.
Mat conditional_op(const Mat& x, const CVec& q, int db) {
  const Mat qb = kron(Mat(q), Mat(Mat::Identity(db, db)));
  return hermitian_part(Mat(qb.adjoint() * x * qb));
}

// Operator on A obtained by pairing B with w: (1⊗w)† x (1⊗w).
Mat a_side_op(const Mat& x, const CVec& w, int da) {
  const Mat aw = kron(Mat(Mat::Identity(da, da)), Mat(w));
  return hermitian_part(Mat(aw.adjoint() * x * aw));
}

double locc1_kl(const Locc1Problem& pr, const Mat& u, const std::vector<Mat>& cond) {
  const int nx = pr.da * pr.da;
  std::vector<double> p, q;
  for (int x = 0; x < nx; ++x) {
    const CVec a = naimark_vector(u, x, pr.da);
    for (int z = 0; z < pr.db; ++z) {
      const CVec s = kron(a, CVec(cond[x].col(z)));
      p.push_back(std::max(s.dot(pr.rho * s).real(), 0.0));
      q.push_back(std::max(s.dot(pr.sigma * s).real(), 0.0));
    }
  }
  return kl_raw(p, q);
}

// Step (i): conditional D_ALL per outcome. warm_elems[x] seeds the warm ω.
void conditional_step(const Locc1Problem& pr, const Mat& u, std::vector<Mat>& cond,
                      const std::vector<std::vector<Mat>>* warm_elems) {
  const int nx = pr.da * pr.da;
  for (int x = 0; x < nx; ++x) {
    const CVec a = naimark_vector(u, x, pr.da);
    Mat rx = conditional_op(pr.rho, a, pr.db), sx = conditional_op(pr.sigma, a, pr.db);
    const double ax = rx.trace().real(), bx = sx.trace().real();
    if (ax <= 1e-14 || bx <= 1e-14) continue;
    rx /= ax;
    sx /= bx;
    DallOptions o = pr.inner;
    Mat warm;
    if (warm_elems) {
      warm = omega_from_elements((*warm_elems)[x], rx, sx, 1e-12);
      o.warm_omega = &warm;
    } else if (cond[x].size()) {
      o.warm_basis = &cond[x];
    }
    const DallCore c = dall_core(rx, sx, o);
    if (c.support_ok) cond[x] = c.basis;
  }
}

// Step (ii): ascend the Naimark unitary with conditional bases fixed.
AscentResult povm_step(const Locc1Problem& pr, const Mat& u, const std::vector<Mat>& cond, int iters) {
  const int nx = pr.da * pr.da;
  std::vector<ColumnFamily> fams(nx);
  for (int x = 0; x < nx; ++x) {
    for (int z = 0; z < pr.db; ++z) {
      const CVec w = cond[x].col(z);
      fams[x].r.push_back(pr.v * a_side_op(pr.rho, w, pr.da) * pr.v.adjoint());
      fams[x].s.push_back(pr.v * a_side_op(pr.sigma, w, pr.da) * pr.v.adjoint());
    }
  }
  return ascend_columns(u, fams, iters);
}

Locc1Core locc1_run(const Locc1Problem& pr, Mat u, std::vector<Mat> cond,
                    const std::vector<std::vector<Mat>>* warm_elems, int rounds) {
  Locc1Core best;
  conditional_step(pr, u, cond, warm_elems);
  for (auto& c : cond)
    if (!c.size()) c = Mat::Identity(pr.db, pr.db);
  double value = locc1_kl(pr, u, cond);
  int r = 0;
  for (; r < rounds; ++r) {
    const AscentResult a = povm_step(pr, u, cond, 50);
    if (a.value > value) u = a.u;
    conditional_step(pr, u, cond, nullptr);
    const double nv = locc1_kl(pr, u, cond);
    const double gain = nv - value;
    value = std::max(value, nv);
    if (!(gain > 1e-10)) {
      best.converged = true;
      break;
    }
  }
  best.value = value;
  best.u = u;
  best.cond = cond;
  best.iterations = r;
  return best;
}

Measurement locc1_measurement(const Split& sp, const Mat& u, const std::vector<Mat>& cond) {
  Measurement m;
  m.cls = MeasClass::LOCC1;
  m.layout = sp.original;
  m.first = sp.first;
  m.second = sp.second;
  m.naimark_first = u;
  const int nx = sp.da * sp.da;
  m.conditional.resize(nx);
  for (int x = 0; x < nx; ++x) {
    const CVec a = naimark_vector(u, x, sp.da);
    const Mat qa = a * a.adjoint();
    m.first_povm.push_back(qa);
    for (int z = 0; z < sp.db; ++z) {
      const CVec w = cond[x].col(z);
      const Mat qb = w * w.adjoint();
      m.conditional[x].push_back(qb);
      m.elements.push_back(sp.back(kron(qa, qb)));
    }
  }
  return m;
}

// ------------------------------------------------------------------- LO ----

struct LoCore {
  double value = -kInf;
  Mat ua, ub;
  int iterations = 0;
  bool converged = false;
};

double lo_kl(const Mat& rho, const Mat& sigma, const Mat& ua, const Mat& ub, int da, int db) {
  std::vector<double> p, q;
  for (int x = 0; x < da * da; ++x) {
    const CVec a = naimark_vector(ua, x, da);
    for (int y = 0; y < db * db; ++y) {
      const CVec s = kron(a, naimark_vector(ub, y, db));
      p.push_back(std::max(s.dot(rho * s).real(), 0.0));
      q.push_back(std::max(s.dot(sigma * s).real(), 0.0));
    }
  }
  return kl_raw(p, q);
}

LoCore lo_run(const Mat& rho, const Mat& sigma, int da, int db, Mat ua, Mat ub, int rounds) {
  const Mat va = embed_vector_matrix(da), vb = embed_vector_matrix(db);
  LoCore out;
  double value = lo_kl(rho, sigma, ua, ub, da, db);
  int r = 0;
  for (; r < rounds; ++r) {
    ColumnFamily fa, fb;
    for (int y = 0; y < db * db; ++y) {
      const CVec b = naimark_vector(ub, y, db);
      fa.r.push_back(va * a_side_op(rho, b, da) * va.adjoint());
      fa.s.push_back(va * a_side_op(sigma, b, da) * va.adjoint());
    }
    const AscentResult ra = ascend_columns(ua, {fa}, 50);
    if (ra.value > value) ua = ra.u;
    for (int x = 0; x < da * da; ++x) {
      const CVec a = naimark_vector(ua, x, da);
      fb.r.push_back(vb * conditional_op(rho, a, db) * vb.adjoint());
      fb.s.push_back(vb * conditional_op(sigma, a, db) * vb.adjoint());
    }
    const AscentResult rb = ascend_columns(ub, {fb}, 50);
    if (rb.value > lo_kl(rho, sigma, ua, ub, da, db)) ub = rb.u;
    const double nv = lo_kl(rho, sigma, ua, ub, da, db);
    const double gain = nv - value;
    value = std::max(value, nv);
    if (!(gain > 1e-10)) {
      out.converged = true;
      break;
    }
  }
  out.value = value;
  out.ua = ua;
  out.ub = ub;
  out.iterations = r;
  return out;
}

Measurement lo_measurement(const Split& sp, const Mat& ua, const Mat& ub) {
  Measurement m;
  m.cls = MeasClass::LO;
  m.layout = sp.original;
  m.first = sp.first;
  m.second = sp.second;
  m.naimark_first = ua;
  m.naimark_second = ub;
  for (int x = 0; x < sp.da * sp.da; ++x) {
    const CVec a = naimark_vector(ua, x, sp.da);
    m.first_povm.push_back(a * a.adjoint());
  }
  for (int y = 0; y < sp.db * sp.db; ++y) {
    const CVec b = naimark_vector(ub, y, sp.db);
    m.second_povm.push_back(b * b.adjoint());
  }
  for (const Mat& qa : m.first_povm)
    for (const Mat& qb : m.second_povm) m.elements.push_back(sp.back(kron(qa, qb)));
  return m;
}

template <typename Core>
std::size_t best_index(const std::vector<Core>& runs) {
  std::size_t bi = 0;
  for (std::size_t i = 1; i < runs.size(); ++i)
    if (runs[i].value > runs[bi].value) bi = i;
  return bi;
}

bool supported(const Mat& rho, const Mat& sigma) {
  const Eigensystem es = eigh(hermitian_part(sigma));
  const double cut = es.support_cutoff();
  double leak = 0.0;
  for (Eigen::Index i = 0; i < es.dim(); ++i)
    if (es.values(i) <= cut) leak += es.vectors.col(i).dot(rho * es.vectors.col(i)).real();
  return leak <= 1e-12;
}

// Derivative along ω_γ = (1−γ)ω + γ a of tr ρ log ω_γ.
double directional(const Mat& rho, const Mat& omega, const Mat& a) {
  const Eigensystem es = eigh(omega);
  if (es.values(0) <= 0.0) return kInf;
  const Mat g = log_derivative(es, rho);
  return (g * (a - omega)).trace().real();
}

double log_value(const Mat& rho, const Mat& omega) {
  const Eigensystem es = eigh(omega);
  if (es.values(0) <= 0.0) return -kInf;
  const Mat rv = es.vectors.adjoint() * rho * es.vectors;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < es.dim(); ++i) acc += rv(i, i).real() * std::log(es.values(i));
  return acc;
}

struct Atom {
  double w;                  // weight in the simplex Σw = 1
  std::vector<CVec> f;       // unit factors
  CVec s;                    // unit product vector
  double c;                  // 1 / s†σs
};

Mat atoms_op(const std::vector<Atom>& atoms, Eigen::Index d) {
  Mat w = Mat::Zero(d, d);
  for (const Atom& a : atoms) w += (a.w * a.c) * (a.s * a.s.adjoint());
  return hermitian_part(w);
}

}  // namespace

// ------------------------------------------------------------ public API ----

const char* to_string(MeasClass c) {
  switch (c) {
    case MeasClass::All: return "ALL";
    case MeasClass::LO: return "LO";
    case MeasClass::LOCC1: return "LOCC1";
    case MeasClass::SEPP: return "SEPP";
    case MeasClass::PPT: return "PPT";
  }
  return "?";
}

const char* to_string(Direction d) {
  switch (d) {
    case Direction::Exact: return "exact";
    case Direction::Lower: return "lower";
    case Direction::Upper: return "upper";
    case Direction::Heuristic: return "heuristic";
  }
  return "?";
}

MeasClass meas_class_from_string(const std::string& s) {
  std::string u;
  for (char ch : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  if (u == "ALL") return MeasClass::All;
  if (u == "LO") return MeasClass::LO;
  if (u == "LOCC1") return MeasClass::LOCC1;
  if (u == "SEPP") return MeasClass::SEPP;
  if (u == "PPT") return MeasClass::PPT;
  throw ParameterError("unknown measurement class '" + s + "'");
}

void Measurement::validate(double tol) const {
  const int d = layout.total_dim();
  if (elements.empty()) throw ContractViolation("measurement: no elements");
  Mat sum = Mat::Zero(d, d);
  for (const Mat& e : elements) {
    if (e.rows() != d || e.cols() != d) throw ContractViolation("measurement: element size mismatch");
    if (min_eigenvalue(e) < -tol) throw ContractViolation("measurement: element not PSD");
    sum += e;
  }
  if (max_abs(Mat(sum - Mat::Identity(d, d))) > tol)
    throw ContractViolation("measurement: elements do not sum to identity");
  if (first_povm.empty() || (cls != MeasClass::LOCC1 && cls != MeasClass::LO)) return;
  const Split sp(layout, first);
  if (cls == MeasClass::LOCC1) {
    if (static_cast<int>(first_povm.size()) > sp.da * sp.da)
      throw ContractViolation("measurement: LOCC1 first POVM exceeds d² outcomes");
    if (conditional.size() != first_povm.size()) throw ContractViolation("measurement: conditional count");
    std::size_t idx = 0;
    for (std::size_t x = 0; x < first_povm.size(); ++x) {
      Mat cs = Mat::Zero(sp.db, sp.db);
      for (const Mat& qb : conditional[x]) {
        if (idx >= elements.size()) throw ContractViolation("measurement: structure/element count");
        if (max_abs(Mat(sp.to(LabeledOperator(layout, elements[idx])) - kron(first_povm[x], qb))) > tol)
          throw ContractViolation("measurement: LOCC1 structure does not reproduce elements");
        cs += qb;
        ++idx;
      }
      if (max_abs(Mat(cs - Mat::Identity(sp.db, sp.db))) > tol)
        throw ContractViolation("measurement: conditional POVM does not sum to identity");
    }
    if (idx != elements.size()) throw ContractViolation("measurement: structure/element count");
  } else {
    std::size_t idx = 0;
    for (const Mat& qa : first_povm)
      for (const Mat& qb : second_povm) {
        if (idx >= elements.size() ||
            max_abs(Mat(sp.to(LabeledOperator(layout, elements[idx])) - kron(qa, qb))) > tol)
          throw ContractViolation("measurement: LO structure does not reproduce elements");
        ++idx;
      }
    if (idx != elements.size()) throw ContractViolation("measurement: structure/element count");
  }
}

std::vector<double> born(const Mat& rho, const Measurement& m) { return born_elems(rho, m.elements); }

double kl(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw ParameterError("kl: length mismatch");
  return kl_raw(p, q);
}

double evaluate(const Measurement& m, const Mat& rho, const Mat& sigma) {
  return kl_raw(born(rho, m), born(sigma, m));
}

Mat variational_omega(const Measurement& m, const Mat& rho, const Mat& sigma, double floor) {
  return omega_from_elements(m.elements, rho, sigma, floor);
}

double variational_value(const Mat& rho, const Mat& sigma, const Mat& omega) {
  const Mat w = hermitian_part(omega);
  return variational_raw(rho, sigma, eigh(w), w);
}

double ConeElement::check(const std::vector<int>& dims, const std::vector<std::vector<int>>& transposes) const {
  int total = 1;
  for (int d : dims) total *= d;
  if (op.rows() != total || op.cols() != total) throw CertificateError("cone: operator size mismatch");
  switch (cone) {
    case MeasClass::SEPP: {
      if (weights.size() != factors.size()) throw CertificateError("cone: weight/factor count mismatch");
      Mat acc = Mat::Zero(total, total);
      for (std::size_t j = 0; j < weights.size(); ++j) {
        if (weights[j] < 0.0) throw CertificateError("cone: negative weight");
        if (factors[j].size() != dims.size()) throw CertificateError("cone: factor count mismatch");
        for (std::size_t g = 0; g < dims.size(); ++g)
          if (factors[j][g].size() != dims[g]) throw CertificateError("cone: factor size mismatch");
        const CVec s = kron_all(factors[j]);
        acc += weights[j] * (s * s.adjoint());
      }
      return max_abs(Mat(acc - op));
    }
    case MeasClass::PPT:
      return std::max(0.0, -min_ppt_eigenvalue(op, dims, transposes));
    default: {
      // CQ: orthogonal projectors on the first factor with PSD blocks.
      if (dims.size() != 2 || projectors.size() != blocks.size()) throw CertificateError("cone: CQ shape");
      Mat psum = Mat::Zero(dims[0], dims[0]);
      Mat acc = Mat::Zero(total, total);
      for (std::size_t x = 0; x < projectors.size(); ++x) {
        const Mat& p = projectors[x];
        if (max_abs(Mat(p * p - p)) > 1e-10) throw CertificateError("cone: CQ element is not a projector");
        if (min_eigenvalue(blocks[x]) < -1e-10) throw CertificateError("cone: CQ block not PSD");
        psum += p;
        acc += kron(p, blocks[x]);
      }
      if (max_abs(Mat(psum * psum - psum)) > 1e-10)
        throw CertificateError("cone: CQ projectors are not mutually orthogonal");
      return max_abs(Mat(acc - op));
    }
  }
}

MeasuredValue d_all(const Mat& rho, const Mat& sigma, const DallOptions& opts) {
  return finish_dall(flat_layout(rho.rows()), rho, sigma, dall_core(rho, sigma, opts));
}

MeasuredValue d_all(const LabeledOperator& rho, const LabeledOperator& sigma, const DallOptions& opts) {
  require_same_layout(rho, sigma);
  return finish_dall(rho.layout(), rho.mat(), sigma.mat(), dall_core(rho.mat(), sigma.mat(), opts));
}

MeasuredValue d_pinch(const Mat& rho, const Mat& sigma, double rel_gap) {
  return d_pinch(LabeledOperator(flat_layout(rho.rows()), rho), LabeledOperator(flat_layout(rho.rows()), sigma),
                 rel_gap);
}

MeasuredValue d_pinch(const LabeledOperator& rho, const LabeledOperator& sigma, double rel_gap) {
  require_same_layout(rho, sigma);
  MeasuredValue mv;
  int count = 0;
  const Mat u = pinch_basis(rho.mat(), hermitian_part(sigma.mat()), rel_gap, &count);
  mv.witness = projective(rho.layout(), u);
  mv.value = evaluate(mv.witness, rho.mat(), sigma.mat());
  mv.support_ok = std::isfinite(mv.value);
  mv.direction = Direction::Lower;
  mv.spec_count = count_distinct(eigh(hermitian_part(sigma.mat())).values, rel_gap);
  if (mv.support_ok) mv.omega = variational_omega(mv.witness, rho.mat(), sigma.mat());
  mv.upper_estimate = mv.value;
  return mv;
}

MeasuredValue d_locc1(const LabeledOperator& rho, const LabeledOperator& sigma, const LabelSet& first,
                      const SolverBudget& budget, const Measurement* warm) {
  require_same_layout(rho, sigma);
  const Split sp(rho.layout(), first);
  Locc1Problem pr{sp.to(rho), sp.to(sigma), sp.da, sp.db, embed_vector_matrix(sp.da), {}};
  pr.inner.fw_iterations = budget.inner_fw;
  pr.inner.polish_iterations = budget.inner_polish;
  const int nx = sp.da * sp.da;
  const bool ok = supported(pr.rho, pr.sigma);

  // Start 0: warm (if any); then identity; then Haar-random Naimark unitaries.
  std::vector<std::vector<Mat>> warm_elems;
  Mat warm_u;
  if (warm) {
    if (!(warm->layout == sp.original) || warm->first != sp.first || warm->naimark_first.rows() != nx)
      throw LayoutError("d_locc1: warm measurement does not match the split");
    warm_u = warm->naimark_first;
    warm_elems.resize(nx);
    for (int x = 0; x < nx; ++x)
      warm_elems[x] = warm->cls == MeasClass::LO ? warm->second_povm : warm->conditional[x];
  }
  const int extra = warm ? 1 : 0;
  const int starts = ok ? std::max(budget.restarts, 1) + extra : 1;
  const std::uint64_t base = derive_seed(budget.seed, tag_of("d_locc1"));
  std::vector<Locc1Core> runs(starts);
  parallel_for(starts, [&](int r) {
    std::vector<Mat> cond(nx);
    if (warm && r == 0) {
      runs[r] = locc1_run(pr, warm_u, cond, &warm_elems, ok ? budget.rounds : 0);
      return;
    }
    Mat u = Mat::Identity(nx, nx);
    if (r - extra > 0) {
      Rng rng(base, static_cast<std::uint64_t>(r));
      u = random_unitary(nx, rng);
    }
    runs[r] = locc1_run(pr, u, cond, nullptr, ok ? budget.rounds : 0);
  });
  const Locc1Core& best = runs[best_index(runs)];
  MeasuredValue mv;
  mv.direction = Direction::Lower;
  mv.witness = locc1_measurement(sp, best.u, best.cond);
  mv.value = evaluate(mv.witness, rho.mat(), sigma.mat());
  mv.support_ok = ok;
  mv.incomplete = !ok || !best.converged;
  mv.converged = best.converged;
  mv.iterations = best.iterations;
  if (std::isfinite(mv.value)) mv.omega = variational_omega(mv.witness, rho.mat(), sigma.mat());
  mv.upper_estimate = mv.value;
  for (const auto& r : runs) mv.trace.push_back(r.value);
  return mv;
}

MeasuredValue d_lo(const LabeledOperator& rho, const LabeledOperator& sigma, const LabelSet& first,
                   const SolverBudget& budget) {
  require_same_layout(rho, sigma);
  const Split sp(rho.layout(), first);
  const Mat r = sp.to(rho), s = sp.to(sigma);
  const int na = sp.da * sp.da, nb = sp.db * sp.db;
  const int starts = std::max(budget.restarts, 1);
  const std::uint64_t base = derive_seed(budget.seed, tag_of("d_lo"));
  std::vector<LoCore> runs(starts);
  parallel_for(starts, [&](int k) {
    Mat ua = Mat::Identity(na, na), ub = Mat::Identity(nb, nb);
    if (k > 0) {
      Rng rng(base, static_cast<std::uint64_t>(k));
      ua = random_unitary(na, rng);
      ub = random_unitary(nb, rng);
    }
    runs[k] = lo_run(r, s, sp.da, sp.db, ua, ub, budget.rounds);
  });
  const LoCore& best = runs[best_index(runs)];
  MeasuredValue mv;
  mv.direction = Direction::Lower;
  mv.witness = lo_measurement(sp, best.ua, best.ub);
  mv.value = evaluate(mv.witness, rho.mat(), sigma.mat());
  mv.support_ok = std::isfinite(mv.value);
  mv.converged = best.converged;
  mv.incomplete = !best.converged;
  mv.iterations = best.iterations;
  if (mv.support_ok) mv.omega = variational_omega(mv.witness, rho.mat(), sigma.mat());
  mv.upper_estimate = mv.value;
  for (const auto& run : runs) mv.trace.push_back(run.value);
  return mv;
}

ConeElement lo_cone_element(const Measurement& lo, const LabeledOperator& rho, const LabeledOperator& sigma) {
  if (lo.cls != MeasClass::LO || lo.first_povm.empty()) throw ContractViolation("lo_cone_element: not an LO witness");
  const Split sp(lo.layout, lo.first);
  const Mat r = sp.to(rho), s = sp.to(sigma);
  ConeElement ce;
  ce.cone = MeasClass::SEPP;
  ce.layout = sp.ordered;
  std::vector<std::pair<double, std::vector<CVec>>> terms;
  double rmax = 0.0;
  std::vector<double> ratios;
  std::vector<std::vector<CVec>> facs;
  std::vector<double> norms;
  for (int x = 0; x < sp.da * sp.da; ++x) {
    const CVec a = naimark_vector(lo.naimark_first, x, sp.da);
    for (int y = 0; y < sp.db * sp.db; ++y) {
      const CVec b = naimark_vector(lo.naimark_second, y, sp.db);
      const CVec v = kron(a, b);
      const double p = std::max(v.dot(r * v).real(), 0.0), q = std::max(v.dot(s * v).real(), 0.0);
      const double ratio = q > kTiny ? p / q : 0.0;
      rmax = std::max(rmax, ratio);
      ratios.push_back(ratio);
      const double na = a.norm(), nb = b.norm();
      norms.push_back(na * na * nb * nb);
      facs.push_back({na > 0 ? CVec(a / na) : a, nb > 0 ? CVec(b / nb) : b});
    }
  }
  if (!(rmax > 0.0)) rmax = 1.0;
  const int d = sp.da * sp.db;
  ce.op = Mat::Zero(d, d);
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    if (norms[k] <= 1e-30) continue;
    const double w = std::max(ratios[k], 1e-12 * rmax) * norms[k];
    ce.weights.push_back(w);
    ce.factors.push_back(facs[k]);
    const CVec v = kron_all(facs[k]);
    ce.op += w * (v * v.adjoint());
  }
  const double t = (s * ce.op).trace().real();
  for (double& w : ce.weights) w /= t;
  ce.op /= t;
  return ce;
}

MeasuredValue cone_bound(const LabeledOperator& rho, const LabeledOperator& sigma, MeasClass cone,
                         const std::vector<LabelSet>& groups, const ConeOptions& opts) {
  require_same_layout(rho, sigma);
  if (cone == MeasClass::PPT) {
    // Transpose every group but the first (one per cut is equivalent for bipartitions).
    std::vector<LabelSet> t(groups.begin() + (groups.empty() ? 0 : 1), groups.end());
    return cone_bound_ppt(rho, sigma, t, opts);
  }
  if (cone != MeasClass::SEPP) throw ParameterError("cone_bound: cone must be SEPP or PPT");
  require_partition(rho.layout(), groups, true);
  LabelSet order;
  std::vector<int> gdims;
  std::vector<LabelSet> canon;
  for (const auto& g : groups) {
    const LabelSet c = rho.layout().restricted_to(g).labels();
    canon.push_back(c);
    order.insert(order.end(), c.begin(), c.end());
    gdims.push_back(rho.layout().dim_of(c));
  }
  std::vector<int> odims;
  for (const auto& l : order) odims.push_back(rho.layout().dim_of(l));
  const SystemLayout ordered(order, odims);
  const Mat r = hermitian_part(reorder(rho, order).mat());
  Mat s = hermitian_part(reorder(sigma, order).mat());
  const Eigen::Index d = r.rows();

  MeasuredValue mv;
  mv.direction = Direction::Upper;
  if (!supported(r, s)) {
    mv.value = kInf;
    mv.upper_estimate = kInf;
    mv.support_ok = false;
    return mv;
  }
  // A tiny ridge keeps the cross-section tr σω = 1 bounded when σ is singular.
  {
    const double lmin = min_eigenvalue(s), lmax = eigh(s).max_abs_value();
    if (lmin <= 1e-12 * lmax) s += (1e-12 * lmax) * Mat::Identity(d, d);
  }
  auto make_atom = [&](double w, std::vector<CVec> f) {
    for (auto& v : f) v /= v.norm();
    const CVec sv = kron_all(f);
    return Atom{w, std::move(f), sv, 1.0 / std::max(sv.dot(s * sv).real(), kTiny)};
  };
  // Start: ω ∝ 1 from computational product atoms.
  std::vector<Atom> atoms;
  {
    std::vector<int> idx(gdims.size(), 0);
    for (Eigen::Index k = 0; k < d; ++k) {
      std::vector<CVec> f;
      Eigen::Index rem = k;
      for (std::size_t g = gdims.size(); g-- > 0;) {
        idx[g] = static_cast<int>(rem % gdims[g]);
        rem /= gdims[g];
      }
      for (std::size_t g = 0; g < gdims.size(); ++g) f.push_back(CVec::Unit(gdims[g], idx[g]));
      Atom a = make_atom(0.0, f);
      a.w = 1.0 / a.c;  // weight ∝ s†σs gives ω = 1/trσ
      atoms.push_back(std::move(a));
    }
    double tw = 0.0;
    for (const auto& a : atoms) tw += a.w;
    for (auto& a : atoms) a.w /= tw;
  }
  double value = log_value(r, atoms_op(atoms, d));
  if (opts.warm && opts.warm->cone == MeasClass::SEPP) {
    if (!(opts.warm->layout == ordered)) throw LayoutError("cone_bound: warm element layout mismatch");
    std::vector<Atom> wa;
    double tw = 0.0;
    for (std::size_t j = 0; j < opts.warm->weights.size(); ++j) {
      Atom a = make_atom(0.0, opts.warm->factors[j]);
      double nrm = 1.0;
      for (const auto& f : opts.warm->factors[j]) nrm *= f.squaredNorm();
      a.w = opts.warm->weights[j] * nrm / a.c;
      tw += a.w;
      wa.push_back(std::move(a));
    }
    if (tw > 0) {
      for (auto& a : wa) a.w /= tw;
      const double wv = log_value(r, atoms_op(wa, d));
      if (wv > value) {
        value = wv;
        atoms = std::move(wa);
      }
    }
  }
  std::vector<Atom> best_atoms = atoms;
  double best = value;
  mv.trace.push_back(value);
  Rng rng(opts.seed, tag_of("cone_sepp"));
  const std::size_t cap = static_cast<std::size_t>(2 * d * d);
  double gap = kInf;
  int it = 0;
  for (; it < opts.iterations; ++it) {
    Mat omega = atoms_op(atoms, d);
    const Eigensystem es = eigh(omega);
    const Mat g = hermitian_part(log_derivative(es, r));
    std::vector<std::vector<CVec>> seeds;
    std::vector<std::size_t> ord(atoms.size());
    for (std::size_t j = 0; j < ord.size(); ++j) ord[j] = j;
    std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return atoms[a].w > atoms[b].w; });
    for (std::size_t j = 0; j < std::min<std::size_t>(3, ord.size()); ++j) seeds.push_back(atoms[ord[j]].f);
    const ProductVector pv = best_product_vector(g, &s, gdims, rng, opts.oracle_starts, seeds);
    gap = pv.value - (g * omega).trace().real();
    if (gap <= 1e-9) {
      mv.converged = true;
      break;
    }
    Atom na = make_atom(0.0, pv.factors);
    const Mat a_op = na.c * (na.s * na.s.adjoint());
    // Bisection on the derivative of the concave line objective.
    double lo = 0.0, hi = 1.0;
    for (int b = 0; b < 40; ++b) {
      const double mid = 0.5 * (lo + hi);
      const double dv = directional(r, (1.0 - mid) * omega + mid * a_op, a_op);
      (dv > 0.0 ? lo : hi) = mid;
    }
    const double gamma = lo;
    if (gamma <= 0.0) {
      mv.converged = true;
      break;
    }
    for (auto& a : atoms) a.w *= (1.0 - gamma);
    na.w = gamma;
    atoms.push_back(std::move(na));
    // Multiplicative reweighting of the active atoms, kept only when it helps.
    double cur = log_value(r, atoms_op(atoms, d));
    for (int em = 0; em < 5; ++em) {
      const Eigensystem ew = eigh(atoms_op(atoms, d));
      const Mat ge = log_derivative(ew, r);
      std::vector<Atom> trial = atoms;
      double tw = 0.0;
      for (auto& a : trial) {
        a.w *= std::max(a.c * a.s.dot(ge * a.s).real(), 0.0);
        tw += a.w;
      }
      if (!(tw > 0)) break;
      for (auto& a : trial) a.w /= tw;
      const double tv = log_value(r, atoms_op(trial, d));
      if (!(tv > cur)) break;
      atoms = std::move(trial);
      cur = tv;
    }
    atoms.erase(std::remove_if(atoms.begin(), atoms.end(), [](const Atom& a) { return a.w <= 1e-14; }),
                atoms.end());
    if (atoms.size() > cap) {
      std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.w > b.w; });
      atoms.resize(cap);
      double tw = 0.0;
      for (const auto& a : atoms) tw += a.w;
      for (auto& a : atoms) a.w /= tw;
      cur = log_value(r, atoms_op(atoms, d));
    }
    value = cur;
    if (value > best) {
      best = value;
      best_atoms = atoms;
    }
    mv.trace.push_back(best);
  }
  mv.iterations = it;
  mv.incomplete = !mv.converged;
  mv.value = best;
  mv.upper_estimate = best + std::max(gap, 0.0);
  ConeElement ce;
  ce.cone = MeasClass::SEPP;
  ce.layout = ordered;
  ce.op = atoms_op(best_atoms, d);
  for (const auto& a : best_atoms) {
    ce.weights.push_back(a.w * a.c);
    ce.factors.push_back(a.f);
  }
  mv.omega = reorder(LabeledOperator(ordered, ce.op), rho.layout().labels()).mat();
  mv.value = variational_value(rho.mat(), sigma.mat(), mv.omega);
  mv.cone = std::move(ce);
  (void)canon;
  return mv;
}

MeasuredValue cone_bound_ppt(const LabeledOperator& rho, const LabeledOperator& sigma,
                             const std::vector<LabelSet>& transposes, const ConeOptions& opts) {
  require_same_layout(rho, sigma);
  const SystemLayout& layout = rho.layout();
  std::vector<std::vector<int>> tsys;
  for (const auto& t : transposes) {
    require_labels(layout, t);
    std::vector<int> idx;
    for (const auto& l : t) idx.push_back(static_cast<int>(layout.index_of(l)));
    tsys.push_back(idx);
  }
  const Mat r = hermitian_part(rho.mat());
  Mat s = hermitian_part(sigma.mat());
  const Eigen::Index d = r.rows();
  MeasuredValue mv;
  mv.direction = Direction::Upper;
  if (!supported(r, s)) {
    mv.value = kInf;
    mv.upper_estimate = kInf;
    mv.support_ok = false;
    return mv;
  }
  {
    const double lmin = min_eigenvalue(s), lmax = eigh(s).max_abs_value();
    if (lmin <= 1e-12 * lmax) s += (1e-12 * lmax) * Mat::Identity(d, d);
  }
  const double trs = s.trace().real();
  const Mat interior = Mat::Identity(d, d) / trs;
  auto objective = [&](const Mat& w) { return variational_value(r, s, w); };
  // Pushes a near-feasible point into the strict interior by mixing with 1/trσ.
  auto interiorize = [&](const Mat& w) {
    const double m = min_ppt_eigenvalue(w, layout.dims(), tsys);
    const double margin = 1e-12 / trs;
    Mat out = w;
    if (m < margin) {
      const double delta = std::min(1.0, (margin - m) / (1.0 / trs - m));
      out = (1.0 - delta) * w + delta * interior;
    }
    return Mat(out / (s * out).trace().real());
  };
  Mat omega = interior;
  double value = objective(omega);
  if (opts.warm) {
    const Mat w = reorder(LabeledOperator(opts.warm->layout, opts.warm->op), layout.labels()).mat();
    const Mat wi = interiorize(hermitian_part(w));
    const double wv = objective(wi);
    if (wv > value) {
      value = wv;
      omega = wi;
    }
  }
  mv.trace.push_back(value);
  ProjectionSpec spec;
  spec.dims = layout.dims();
  spec.transposes = tsys;
  spec.affine = &s;
  spec.affine_value = 1.0;
  spec.max_iter = 500;
  spec.tol = 1e-11;
  double eta = 1.0 / std::max(1.0, eigh(r).max_abs_value());
  int it = 0;
  for (; it < opts.iterations; ++it) {
    const Mat grad = hermitian_part(Mat(log_derivative(eigh(omega), r) - s));
    const Mat cand = interiorize(dykstra_project(Mat(omega + eta * grad), spec));
    const double cv = objective(cand);
    if (cv > value + 1e-15 * std::max(1.0, std::abs(value))) {
      const double gain = cv - value;
      omega = cand;
      value = cv;
      eta *= 1.5;
      mv.trace.push_back(value);
      if (gain <= 1e-12 * std::max(1.0, std::abs(value))) {
        mv.converged = true;
        break;
      }
    } else {
      eta *= 0.5;
      if (eta < 1e-12) {
        mv.converged = true;
        break;
      }
    }
  }
  mv.iterations = it;
  mv.incomplete = !mv.converged;
  ConeElement ce;
  ce.cone = MeasClass::PPT;
  ce.layout = layout;
  ce.op = omega;
  mv.omega = omega;
  mv.value = variational_value(rho.mat(), sigma.mat(), omega);
  mv.upper_estimate = mv.value;
  mv.cone = std::move(ce);
  return mv;
}

MeasuredChain measured_chain(const LabeledOperator& rho, const LabeledOperator& sigma, const LabelSet& first,
                             const SolverBudget& budget) {
  MeasuredChain ch;
  ch.lo = d_lo(rho, sigma, first, budget);
  ch.locc1 = d_locc1(rho, sigma, first, budget, &ch.lo.witness);
  DallOptions o;
  const Mat warm = ch.locc1.omega;
  if (warm.size()) o.warm_omega = &warm;
  ch.all = d_all(rho, sigma, o);
  ch.umegaki = umegaki(rho, sigma).value;
  return ch;
}

FidNorm restricted_fid_norm(const LabeledOperator& rho, const LabeledOperator& sigma, MeasClass cls,
                            const LabelSet& first, const SolverBudget& budget) {
  require_same_layout(rho, sigma);
  FidNorm out;
  if (cls == MeasClass::All) {
    out.fidelity = fidelity(hermitian_part(rho.mat()), hermitian_part(sigma.mat()));
    out.norm = trace_norm(Mat(rho.mat() - sigma.mat()));
    out.divergence = d_all(rho, sigma).value;
    out.direction = Direction::Exact;
    return out;
  }
  if (cls != MeasClass::LO && cls != MeasClass::LOCC1)
    throw ParameterError("restricted_fid_norm: class must be ALL, LO or LOCC1");
  std::vector<Measurement> cands;
  const MeasuredValue lo = d_lo(rho, sigma, first, budget);
  cands.push_back(lo.witness);
  double div = lo.value;
  if (cls == MeasClass::LOCC1) {
    const MeasuredValue l1 = d_locc1(rho, sigma, first, budget, &lo.witness);
    cands.push_back(l1.witness);
    div = std::max(div, l1.value);
  }
  const int d = rho.dim();
  cands.push_back(projective(rho.layout(), Mat::Identity(d, d)));
  out.fidelity = 1.0;
  out.norm = 0.0;
  for (const auto& m : cands) {
    const auto p = born(rho.mat(), m), q = born(sigma.mat(), m);
    double bc = 0.0, l1 = 0.0;
    for (std::size_t z = 0; z < p.size(); ++z) {
      bc += std::sqrt(p[z] * q[z]);
      l1 += std::abs(p[z] - q[z]);
    }
    out.fidelity = std::min(out.fidelity, bc * bc);
    out.norm = std::max(out.norm, l1);
    div = std::max(div, kl_raw(p, q));
  }
  out.divergence = div;
  out.direction = Direction::Heuristic;
  return out;
}

Measurement pullback_locc1(const Measurement& m, const OneWayChannel& g) {
  if (!(m.layout == g.layout)) throw LayoutError("pullback_locc1: layout mismatch");
  Measurement out;
  out.cls = MeasClass::LOCC1;
  out.layout = g.layout;
  out.first = m.first;
  out.second = m.second;
  for (const Mat& e : m.elements) out.elements.push_back(hermitian_part(g.adjoint(e)));
  return out;
}

}  // namespace entlab
