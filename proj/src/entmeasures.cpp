#include "entlab/entmeasures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

#include "entlab/entropy.hpp"
#include "entlab/linop.hpp"
#include "entlab/optim.hpp"
#include "entlab/parallel.hpp"
#include "entlab/random.hpp"

namespace entlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Layout with the groups concatenated (labels kept in layout order inside a group).
struct Grouping {
  SystemLayout original, ordered;
  std::vector<LabelSet> groups;
  std::vector<int> dims;

  Grouping(const SystemLayout& layout, const std::vector<LabelSet>& in) : original(layout) {
    require_partition(layout, in, true);
    LabelSet order;
    std::vector<int> od;
    for (const auto& g : in) {
      groups.push_back(layout.restricted_to(g).labels());
      dims.push_back(layout.dim_of(g));
      for (const auto& l : groups.back()) {
        order.push_back(l);
        od.push_back(layout.dim_of(l));
      }
    }
    ordered = SystemLayout(order, od);
  }
  Mat to(const Mat& m) const { return reorder(LabeledOperator(original, m), ordered.labels()).mat(); }
  Mat back(const Mat& m) const { return reorder(LabeledOperator(ordered, m), original.labels()).mat(); }
  LabeledOperator to(const LabeledOperator& x) const { return reorder(x, ordered.labels()); }
};

// D(ρ‖σ) for a fixed ρ.
struct Umegaki {
  Mat rho;
  double neg_entropy = 0.0;
  explicit Umegaki(const Mat& r) : rho(hermitian_part(r)), neg_entropy(-entropy_of(rho)) {}
  double operator()(const Mat& sigma) const {
    const Eigensystem es = eigh(hermitian_part(sigma));
    const double cut = es.support_cutoff();
    if (es.values(0) < -cut) return kInf;
    double cross = 0.0, leak = 0.0;
    for (Eigen::Index i = 0; i < es.dim(); ++i) {
      const double w = (es.vectors.col(i).adjoint() * rho * es.vectors.col(i))(0, 0).real();
      if (es.values(i) > cut) cross += w * std::log(es.values(i));
      else leak += w;
    }
    if (leak > 1e-12) return kInf;
    return neg_entropy - cross;
  }
  // Dlog_σ[ρ], on a slightly ridged σ when it is singular.
  Mat gradient(const Mat& sigma) const {
    Eigensystem es = eigh(hermitian_part(sigma));
    const double floor = 1e-12 * es.max_abs_value();
    for (Eigen::Index i = 0; i < es.dim(); ++i) es.values(i) = std::max(es.values(i), floor);
    return hermitian_part(log_derivative(es, rho));
  }
};

// Objective at σ (in the working order): value and L = −∇, so that the
// linear oracle maximizes ⟨s|L|s⟩. Measured objectives carry their witness.
struct Eval {
  double value = kInf;
  Mat l;
  std::optional<Measurement> meas;
  std::optional<ConeElement> cone;
  int tag = -1;  // index into a caller-side record of the evaluation
};
struct Objective {
  std::function<Eval(const Mat&)> eval;
  /// Exact objective: cheap line search on `value` itself.
  std::function<double(const Mat&)> value;
};

Objective umegaki_objective(const Mat& rho) {
  auto u = std::make_shared<Umegaki>(rho);
  Objective o;
  o.value = [u](const Mat& s) { return (*u)(s); };
  o.eval = [u](const Mat& s) {
    Eval e;
    e.value = (*u)(s);
    if (std::isfinite(e.value)) e.l = u->gradient(s);
    return e;
  };
  return o;
}

Eval from_measured(const MeasuredValue& mv) {
  Eval e;
  e.value = mv.value;
  if (std::isfinite(e.value) && mv.omega.size()) e.l = hermitian_part(mv.omega);
  else e.value = kInf;
  e.meas = mv.witness;
  e.cone = mv.cone;
  return e;
}

// ---- separable iterates -----------------------------------------------------

struct Atoms {
  std::vector<std::vector<CVec>> factors;
  std::vector<CVec> vecs;
  std::vector<double> w;

  Mat op(int d) const {
    Mat s = Mat::Zero(d, d);
    for (std::size_t k = 0; k < w.size(); ++k) s.noalias() += w[k] * vecs[k] * vecs[k].adjoint();
    return s;
  }
  void add(const std::vector<CVec>& f, double weight) {
    const CVec v = kron_all(f);
    for (std::size_t k = 0; k < vecs.size(); ++k)
      if (std::abs(vecs[k].dot(v)) > 1.0 - 1e-13) {
        w[k] += weight;
        return;
      }
    factors.push_back(f);
    vecs.push_back(v);
    w.push_back(weight);
  }
  void remove(std::size_t k) {
    factors.erase(factors.begin() + k);
    vecs.erase(vecs.begin() + k);
    w.erase(w.begin() + k);
  }
  void prune() {
    for (std::size_t k = w.size(); k-- > 0;)
      if (w[k] <= 1e-15) remove(k);
    double t = 0.0;
    for (double x : w) t += x;
    for (double& x : w) x /= t;
  }
};

Atoms computational_atoms(const std::vector<int>& dims) {
  Atoms a;
  int total = 1;
  for (int d : dims) total *= d;
  for (int idx = 0; idx < total; ++idx) {
    std::vector<CVec> f;
    int rem = idx;
    for (std::size_t g = dims.size(); g-- > 0;) {
      CVec e = CVec::Zero(dims[g]);
      e(rem % dims[g]) = 1.0;
      f.insert(f.begin(), e);
      rem /= dims[g];
    }
    a.add(f, 1.0 / total);
  }
  return a;
}

Atoms random_basis_atoms(const std::vector<int>& dims, Rng& rng) {
  std::vector<Mat> u;
  for (int d : dims) u.push_back(random_unitary(d, rng));
  Atoms a;
  int total = 1;
  for (int d : dims) total *= d;
  std::vector<double> w(total);
  double t = 0.0;
  for (double& x : w) t += (x = 0.5 + rng.uniform());
  for (int idx = 0; idx < total; ++idx) {
    std::vector<CVec> f(dims.size());
    int rem = idx;
    for (std::size_t g = dims.size(); g-- > 0;) {
      f[g] = u[g].col(rem % dims[g]);
      rem /= dims[g];
    }
    a.add(f, w[idx] / t);
  }
  return a;
}

// Removes one atom without changing Σ w_k v_k v_k†, using a linear dependency
// among the projectors (exists once there are more atoms than d²).
void caratheodory_step(Atoms& a) {
  const Eigen::Index d = a.vecs.front().size();
  const Eigen::Index k = static_cast<Eigen::Index>(a.w.size());
  Eigen::MatrixXd m(d * d + 1, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Mat p = a.vecs[j] * a.vecs[j].adjoint();
    Eigen::Index r = 0;
    for (Eigen::Index x = 0; x < d; ++x)
      for (Eigen::Index y = x; y < d; ++y) {
        m(r++, j) = p(x, y).real();
        if (y > x) m(r++, j) = p(x, y).imag();
      }
    m(d * d, j) = 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  Eigen::VectorXd c = svd.matrixV().col(k - 1);
  if (c.maxCoeff() <= 0) c = -c;
  double t = kInf;
  Eigen::Index hit = 0;
  for (Eigen::Index j = 0; j < k; ++j)
    if (c(j) > 1e-14 && a.w[j] / c(j) < t) {
      t = a.w[j] / c(j);
      hit = j;
    }
  for (Eigen::Index j = 0; j < k; ++j) a.w[j] = std::max(0.0, a.w[j] - t * c(j));
  a.w[hit] = 0.0;
  a.remove(static_cast<std::size_t>(hit));
}

// Joint local moves of every atom factor (tangent gradient of ⟨v|L|v⟩) and
// multiplicative weight updates, backtracked on the exact objective.
Eval refine_atoms(const Objective& obj, Atoms& a, const std::vector<int>& dims, Eval cur, int steps) {
  int d = 1;
  for (int x : dims) d *= x;
  double eta = 0.5;
  for (int st = 0; st < steps; ++st) {
    const Mat sigma = a.op(d);
    const double base = (cur.l * sigma).trace().real();
    std::vector<std::vector<CVec>> h(a.w.size());
    std::vector<double> score(a.w.size());
    for (std::size_t k = 0; k < a.w.size(); ++k) {
      const CVec lv = cur.l * a.vecs[k];
      score[k] = a.vecs[k].dot(lv).real() - base;
      for (std::size_t g = 0; g < dims.size(); ++g) {
        Mat m = Mat::Identity(1, 1);
        for (std::size_t q = 0; q < dims.size(); ++q)
          m = kron(m, q == g ? Mat(Mat::Identity(dims[q], dims[q])) : Mat(a.factors[k][q].adjoint()));
        CVec hg = m * lv;
        hg -= a.factors[k][g] * a.factors[k][g].dot(hg);
        h[k].push_back(hg);
      }
    }
    bool moved = false;
    for (int bt = 0; bt < 8 && !moved; ++bt, eta *= 0.5) {
      Atoms t = a;
      double tot = 0.0;
      for (std::size_t k = 0; k < t.w.size(); ++k) {
        for (std::size_t g = 0; g < dims.size(); ++g) {
          CVec f = t.factors[k][g] + eta * h[k][g];
          t.factors[k][g] = f / f.norm();
        }
        t.vecs[k] = kron_all(t.factors[k]);
        t.w[k] *= std::exp(eta * score[k]);
        tot += t.w[k];
      }
      for (double& x : t.w) x /= tot;
      Eval e = obj.eval(t.op(d));
      if (e.value < cur.value) {
        a = std::move(t);
        cur = std::move(e);
        moved = true;
        eta *= 4.0;
      }
    }
    if (!moved) break;
  }
  return cur;
}

double golden_min(const std::function<double(double)>& f, double hi, int iters = 60) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, a = hi - r * hi, b = r * hi;
  double fa = f(a), fb = f(b);
  for (int i = 0; i < iters; ++i) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - r * (hi - lo);
      fa = f(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + r * (hi - lo);
      fb = f(b);
    }
  }
  return fa <= fb ? a : b;
}

struct SepResult {
  Atoms atoms;
  Eval eval;
  double gap = kInf;
  int iterations = 0;
  bool converged = false;
};

// Pairwise conditional gradient over separable states in the working order.
SepResult descend_separable(const Objective& obj, Atoms atoms, const std::vector<int>& dims, int iterations,
                            int oracle_starts, double gap_tol, Rng& rng) {
  int d = 1;
  for (int x : dims) d *= x;
  const std::size_t cap = static_cast<std::size_t>(d) * d;
  atoms.prune();
  SepResult res;
  Mat sigma = atoms.op(d);
  Eval cur = obj.eval(sigma);
  res.atoms = atoms;
  res.eval = cur;
  if (!std::isfinite(cur.value)) return res;
  for (int it = 0; it < iterations; ++it) {
    res.iterations = it + 1;
    std::vector<std::vector<CVec>> seeds;
    {
      std::vector<std::size_t> idx(atoms.w.size());
      for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
      std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return atoms.w[x] > atoms.w[y]; });
      for (std::size_t k = 0; k < std::min<std::size_t>(3, idx.size()); ++k) seeds.push_back(atoms.factors[idx[k]]);
    }
    const ProductVector s = best_product_vector(cur.l, nullptr, dims, rng, oracle_starts, seeds);
    const double ls = (s.vec.adjoint() * cur.l * s.vec)(0, 0).real();
    const double gap = ls - (cur.l * sigma).trace().real();
    res.gap = gap;
    if (gap <= gap_tol) {
      res.converged = true;
      break;
    }
    std::size_t away = 0;
    double amin = kInf;
    for (std::size_t k = 0; k < atoms.w.size(); ++k) {
      const double v = (atoms.vecs[k].adjoint() * cur.l * atoms.vecs[k])(0, 0).real();
      if (v < amin) {
        amin = v;
        away = k;
      }
    }
    const Mat ss = s.vec * s.vec.adjoint();
    // Pairwise direction first, the plain conditional-gradient direction as fallback.
    bool moved = false;
    Eval next;
    for (int mode = 0; mode < 2 && !moved; ++mode) {
      const Mat dir = mode == 0 ? Mat(ss - atoms.vecs[away] * atoms.vecs[away].adjoint()) : Mat(ss - sigma);
      const double gmax = mode == 0 ? atoms.w[away] : 1.0;
      auto point = [&](double g) { return Mat(sigma + g * dir); };
      double step = 0.0;
      if (obj.value) {
        step = golden_min([&](double g) { return obj.value(point(g)); }, gmax);
        if (obj.value(point(gmax)) <= obj.value(point(step))) step = gmax;
        if (step > 0.0) {
          next = obj.eval(point(step));
          moved = next.value < cur.value;
        }
      } else {
        double g = std::min(gmax, 2.0 / (it + 3.0));
        for (int bt = 0; bt < 3 && !moved; ++bt, g *= 0.5) {
          next = obj.eval(point(g));
          if (next.value < cur.value) {
            moved = true;
            step = g;
          }
        }
      }
      if (!moved) continue;
      if (mode == 0) {
        atoms.w[away] -= step;
      } else {
        for (double& x : atoms.w) x *= 1.0 - step;
      }
      atoms.add(s.factors, step);
      atoms.prune();
    }
    if (!moved) break;
    while (atoms.w.size() > cap) caratheodory_step(atoms);
    if (obj.value) {
      // Corrective pairwise steps among the current atoms (no oracle call).
      Mat sg = atoms.op(d);
      Eval ce = next;
      for (int inner = 0; inner < 10 && atoms.w.size() > 1; ++inner) {
        std::size_t up = 0, dn = 0;
        double vu = -kInf, vd = kInf;
        for (std::size_t k = 0; k < atoms.w.size(); ++k) {
          const double v = (atoms.vecs[k].adjoint() * ce.l * atoms.vecs[k])(0, 0).real();
          if (v > vu) { vu = v; up = k; }
          if (v < vd) { vd = v; dn = k; }
        }
        if (vu - vd <= gap_tol) break;
        const Mat dir = atoms.vecs[up] * atoms.vecs[up].adjoint() - atoms.vecs[dn] * atoms.vecs[dn].adjoint();
        const double gmax = atoms.w[dn];
        auto pt = [&](double g) { return Mat(sg + g * dir); };
        double step = golden_min([&](double g) { return obj.value(pt(g)); }, gmax);
        if (obj.value(pt(gmax)) <= obj.value(pt(step))) step = gmax;
        Eval e = obj.eval(pt(step));
        if (!(e.value < ce.value)) break;
        atoms.w[up] += step;
        atoms.w[dn] -= step;
        atoms.prune();
        sg = atoms.op(d);
        ce = e;
      }
      next = refine_atoms(obj, atoms, dims, ce, 5);
    }
    sigma = atoms.op(d);
    cur = next;
    if (cur.value <= res.eval.value) {
      res.eval = cur;
      res.atoms = atoms;
    }
  }
  return res;
}

SeparableDecomposition to_decomposition(const Grouping& g, const Atoms& a) {
  SeparableDecomposition s;
  s.layout = g.original;
  s.groups = g.groups;
  s.weights = a.w;
  s.vectors = a.factors;
  return s;
}

EntMeasureValue sep_result(const Grouping& g, const SepResult& r, Direction dir) {
  EntMeasureValue v;
  v.value = r.eval.value;
  v.direction = dir;
  v.sigma_sep = to_decomposition(g, r.atoms);
  v.sigma = v.sigma_sep->assemble();
  v.inner = r.eval.meas;
  v.inner_cone = r.eval.cone;
  v.lower_estimate = std::isfinite(r.gap) ? r.eval.value - std::max(r.gap, 0.0) : -kInf;
  v.iterations = r.iterations;
  v.converged = r.converged;
  return v;
}

template <typename Better>
int best_index(const std::vector<double>& vals, Better better) {
  int b = 0;
  for (int i = 1; i < static_cast<int>(vals.size()); ++i)
    if (better(vals[i], vals[b])) b = i;
  return b;
}

EntMeasureValue ree_grouped(const LabeledOperator& rho, const Grouping& g, const EntOptions& opts) {
  require_state(rho, "ree");
  const Mat r = g.to(rho.mat());
  const Objective obj = umegaki_objective(r);
  const int restarts = std::max(1, opts.restarts);
  std::vector<SepResult> runs(restarts);
  parallel_for(restarts, [&](int k) {
    Rng rng(derive_seed(opts.seed, tag_of("ree")), static_cast<std::uint64_t>(k));
    Atoms start = k == 0 ? computational_atoms(g.dims) : random_basis_atoms(g.dims, rng);
    runs[k] = descend_separable(obj, start, g.dims, opts.iterations, opts.oracle_starts, opts.gap_tol, rng);
  });
  std::vector<double> vals;
  for (const auto& x : runs) vals.push_back(x.eval.value);
  const int b = best_index(vals, [](double x, double y) { return x < y; });
  EntMeasureValue v = sep_result(g, runs[b], Direction::Upper);
  // Report the value of the witness as assembled.
  v.value = umegaki(rho.mat(), v.sigma.mat()).value;
  return v;
}

// Measured objective on σ in the working order.
Objective measured_objective(const Grouping& g, const LabeledOperator& rho_ordered, MeasClass cls,
                             const EntOptions& opts) {
  Objective o;
  const LabelSet first = g.groups.front();
  o.eval = [&g, rho_ordered, cls, first, opts](const Mat& s) {
    const LabeledOperator sigma(g.ordered, s);
    switch (cls) {
      case MeasClass::All:
        return from_measured(d_all(rho_ordered, sigma));
      case MeasClass::LOCC1:
        return from_measured(d_locc1(rho_ordered, sigma, first, opts.inner));
      case MeasClass::LO:
        return from_measured(d_lo(rho_ordered, sigma, first, opts.inner));
      case MeasClass::SEPP: {
        std::vector<LabelSet> groups = g.groups;
        return from_measured(cone_bound(rho_ordered, sigma, MeasClass::SEPP, groups, opts.cone));
      }
      case MeasClass::PPT: {
        std::vector<LabelSet> t(g.groups.begin() + 1, g.groups.end());
        return from_measured(cone_bound_ppt(rho_ordered, sigma, t, opts.cone));
      }
    }
    return Eval{};
  };
  return o;
}

// ---- PPT iterates -----------------------------------------------------------

struct PptSpec {
  std::vector<int> dims;
  std::vector<std::vector<int>> transposes;
};

PptSpec ppt_spec(const SystemLayout& layout, const std::vector<LabelSet>& transposes) {
  PptSpec p{layout.dims(), {}};
  for (const auto& t : transposes) {
    require_labels(layout, t);
    std::vector<int> idx;
    for (const auto& l : t) idx.push_back(static_cast<int>(layout.index_of(l)));
    p.transposes.push_back(idx);
  }
  return p;
}

// Mixes with the maximally mixed state until every constraint holds exactly.
Mat make_feasible(const Mat& x, const PptSpec& p) {
  const Eigen::Index d = x.rows();
  Mat y = hermitian_part(x);
  y /= y.trace().real();
  const double m = min_ppt_eigenvalue(y, p.dims, p.transposes);
  const double target = 1e-13;
  if (m >= target) return y;
  // (1−ε)m + ε/d ≥ target.
  const double eps = std::min(1.0, (target - m) / (1.0 / d - m));
  return (1.0 - eps) * y + eps * Mat::Identity(d, d) / static_cast<double>(d);
}

struct PptResult {
  Mat sigma;
  Eval eval;
  int iterations = 0;
  bool converged = false;
};

// Projected gradient with Dykstra projection onto PSD ∩ PPT ∩ {tr = 1}.
PptResult descend_ppt(const Objective& obj, Mat sigma, const PptSpec& p, int iterations) {
  const Eigen::Index d = sigma.rows();
  const Mat id = Mat::Identity(d, d);
  ProjectionSpec spec;
  spec.dims = p.dims;
  spec.transposes = p.transposes;
  spec.affine = &id;
  spec.affine_value = 1.0;
  PptResult res;
  res.sigma = sigma;
  res.eval = obj.eval(sigma);
  Eval cur = res.eval;
  if (!std::isfinite(cur.value)) return res;
  double eta = 0.1 / std::max(1.0, max_abs(cur.l));
  for (int it = 0; it < iterations; ++it) {
    res.iterations = it + 1;
    bool moved = false;
    for (int bt = 0; bt < 12 && !moved; ++bt) {
      const Mat cand = make_feasible(dykstra_project(Mat(sigma + eta * cur.l), spec), p);
      Eval e = obj.eval(cand);
      if (e.value < cur.value) {
        moved = true;
        const double gain = cur.value - e.value;
        sigma = cand;
        cur = e;
        eta *= 1.5;
        if (gain < 1e-12) {
          res.converged = true;
          it = iterations;
        }
      } else {
        eta *= 0.5;
      }
    }
    if (cur.value < res.eval.value) {
      res.eval = cur;
      res.sigma = sigma;
    }
    if (!moved) {
      res.converged = true;
      break;
    }
  }
  return res;
}

EntMeasureValue ppt_value(const LabeledOperator& rho, const PptResult& r, Direction dir) {
  EntMeasureValue v;
  v.value = r.eval.value;
  v.direction = dir;
  v.sigma = LabeledOperator(rho.layout(), r.sigma);
  v.inner = r.eval.meas;
  v.inner_cone = r.eval.cone;
  v.lower_estimate = -kInf;
  v.iterations = r.iterations;
  v.converged = r.converged;
  return v;
}

Mat ppt_start(const LabeledOperator& rho, const LabeledOperator* warm, const PptSpec& p) {
  const int d = rho.dim();
  if (!warm) return Mat::Identity(d, d) / static_cast<double>(d);
  if (warm->layout() != rho.layout()) throw LayoutError("ppt: warm start layout mismatch");
  return make_feasible(warm->mat(), p);
}

}  // namespace

EntMeasureValue ree(const LabeledOperator& rho, const std::vector<LabelSet>& groups, const EntOptions& opts) {
  if (groups.size() < 2) throw ParameterError("ree: at least two groups required");
  return ree_grouped(rho, Grouping(rho.layout(), groups), opts);
}

namespace {

EntMeasureValue measured_descent(const LabeledOperator& rho, const Grouping& g, MeasClass cls,
                                 const EntOptions& opts, const EntMeasureValue& start) {
  const LabeledOperator ro = g.to(rho);
  const Objective obj = measured_objective(g, ro, cls, opts);
  Atoms a;
  a.factors = start.sigma_sep->vectors;
  for (const auto& f : a.factors) a.vecs.push_back(kron_all(f));
  a.w = start.sigma_sep->weights;
  Rng rng(derive_seed(opts.seed, tag_of("ree_measured")), static_cast<std::uint64_t>(cls));
  const SepResult r = descend_separable(obj, a, g.dims, opts.outer, opts.oracle_starts, opts.gap_tol, rng);
  return sep_result(g, r, Direction::Heuristic);
}

}  // namespace

EntMeasureValue ree_measured(const LabeledOperator& rho, const LabelSet& first, MeasClass cls,
                             const EntOptions& opts) {
  require_labels(rho.layout(), first);
  const Grouping g(rho.layout(), {first, rho.layout().complement(first)});
  const EntMeasureValue e = ree_grouped(rho, g, opts);
  return measured_descent(rho, g, cls, opts, e);
}

EntMeasuredChain ree_measured_chain(const LabeledOperator& rho, const LabelSet& first, const EntOptions& opts) {
  require_labels(rho.layout(), first);
  const Grouping g(rho.layout(), {first, rho.layout().complement(first)});
  const LabeledOperator ro = g.to(rho);
  EntMeasuredChain ch;
  ch.e = ree_grouped(rho, g, opts);

  // Every σ evaluated by any descent is scored by the full cascade.
  struct Visit {
    Mat sigma;
    MeasuredChain chain;
  };
  std::vector<Visit> visits;
  const MeasClass classes[3] = {MeasClass::All, MeasClass::LOCC1, MeasClass::LO};
  for (MeasClass cls : classes) {
    Objective obj;
    obj.eval = [&](const Mat& s) {
      for (std::size_t k = 0; k < visits.size(); ++k)
        if (max_abs(Mat(visits[k].sigma - s)) == 0.0) {
          const MeasuredValue& mv = cls == MeasClass::All     ? visits[k].chain.all
                                    : cls == MeasClass::LOCC1 ? visits[k].chain.locc1
                                                              : visits[k].chain.lo;
          Eval e = from_measured(mv);
          e.tag = static_cast<int>(k);
          return e;
        }
      MeasuredChain mc = measured_chain(ro, LabeledOperator(g.ordered, s), g.groups.front(), opts.inner);
      visits.push_back({s, mc});
      const MeasuredValue& mv = cls == MeasClass::All ? mc.all : cls == MeasClass::LOCC1 ? mc.locc1 : mc.lo;
      Eval e = from_measured(mv);
      e.tag = static_cast<int>(visits.size() - 1);
      return e;
    };
    Atoms a;
    a.factors = ch.e.sigma_sep->vectors;
    for (const auto& f : a.factors) a.vecs.push_back(kron_all(f));
    a.w = ch.e.sigma_sep->weights;
    Rng rng(derive_seed(opts.seed, tag_of("ree_measured")), static_cast<std::uint64_t>(cls));
    descend_separable(obj, a, g.dims, opts.outer, opts.oracle_starts, opts.gap_tol, rng);
  }
  // Per class, the minimum over all visits (first visit wins ties).
  auto pick = [&](MeasClass cls) {
    std::vector<double> vals;
    for (const auto& v : visits)
      vals.push_back(cls == MeasClass::All ? v.chain.all.value : cls == MeasClass::LOCC1 ? v.chain.locc1.value
                                                                                          : v.chain.lo.value);
    const int b = best_index(vals, [](double x, double y) { return x < y; });
    const MeasuredValue& mv = cls == MeasClass::All     ? visits[b].chain.all
                              : cls == MeasClass::LOCC1 ? visits[b].chain.locc1
                                                        : visits[b].chain.lo;
    EntMeasureValue out;
    out.value = mv.value;
    out.direction = Direction::Heuristic;
    out.sigma = LabeledOperator(rho.layout(), g.back(visits[b].sigma));
    out.inner = mv.witness;
    out.lower_estimate = -kInf;
    out.iterations = static_cast<int>(visits.size());
    return out;
  };
  ch.all = pick(MeasClass::All);
  ch.locc1 = pick(MeasClass::LOCC1);
  ch.lo = pick(MeasClass::LO);
  return ch;
}

EntMeasureValue ppt_ree(const LabeledOperator& rho, const std::vector<LabelSet>& transposes, const EntOptions& opts,
                        const LabeledOperator* warm) {
  require_state(rho, "ppt_ree");
  if (transposes.empty()) throw ParameterError("ppt_ree: at least one transpose set required");
  const PptSpec p = ppt_spec(rho.layout(), transposes);
  auto u = std::make_shared<Umegaki>(rho.mat());
  Objective obj;
  obj.eval = [u](const Mat& s) {
    Eval e;
    e.value = (*u)(s);
    if (std::isfinite(e.value)) e.l = u->gradient(s);
    return e;
  };
  const PptResult r = descend_ppt(obj, ppt_start(rho, warm, p), p, opts.iterations);
  EntMeasureValue v = ppt_value(rho, r, Direction::Upper);
  v.value = (*u)(v.sigma.mat());
  return v;
}

EntMeasureValue ppt_ree_measured(const LabeledOperator& rho, const std::vector<LabelSet>& transposes,
                                 const EntOptions& opts, const LabeledOperator* warm) {
  require_state(rho, "ppt_ree_measured");
  const PptSpec p = ppt_spec(rho.layout(), transposes);
  Objective obj;
  obj.eval = [&](const Mat& s) {
    return from_measured(cone_bound_ppt(rho, LabeledOperator(rho.layout(), s), transposes, opts.cone));
  };
  return ppt_value(rho, descend_ppt(obj, ppt_start(rho, warm, p), p, opts.outer), Direction::Heuristic);
}

EntMeasureValue ree3(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b, const LabelSet& c,
                     Ree3Class cls, const EntOptions& opts) {
  const Grouping g(rho.layout(), {a, b, c});
  switch (cls) {
    case Ree3Class::Exact:
      return ree_grouped(rho, g, opts);
    case Ree3Class::All:
    case Ree3Class::SeppCone: {
      const EntMeasureValue e = ree_grouped(rho, g, opts);
      const LabeledOperator ro = g.to(rho);
      Objective obj;
      obj.eval = [&](const Mat& s) {
        const LabeledOperator sigma(g.ordered, s);
        if (cls == Ree3Class::All) return from_measured(d_all(ro, sigma));
        return from_measured(cone_bound(ro, sigma, MeasClass::SEPP, g.groups, opts.cone));
      };
      Atoms at;
      at.factors = e.sigma_sep->vectors;
      for (const auto& f : at.factors) at.vecs.push_back(kron_all(f));
      at.w = e.sigma_sep->weights;
      Rng rng(derive_seed(opts.seed, tag_of("ree3")), static_cast<std::uint64_t>(cls));
      return sep_result(g, descend_separable(obj, at, g.dims, opts.outer, opts.oracle_starts, opts.gap_tol, rng),
                        Direction::Heuristic);
    }
    case Ree3Class::PptCone:
      return ppt_ree_measured(rho, {a, b, c}, opts);
  }
  throw ParameterError("ree3: unknown class");
}

// ---- extensions ---------------------------------------------------------------

namespace {

struct Extension {
  LabeledOperator op;  // on [input..., E]
  int de = 1;
};

std::vector<Extension> sample_extensions(const LabeledOperator& rho, const ExtensionOptions& opts) {
  if (opts.max_dim < 1 || opts.max_dim > 4) throw ParameterError("extensions: dimension must be in 1..4");
  std::vector<Extension> out;
  const QuantumState qs = QuantumState::from(rho);
  Rng unused(0);
  out.push_back({extension_of(qs, "E", 1, unused).op(), 1});
  for (int de = 2; de <= opts.max_dim; ++de)
    for (int k = 0; k < opts.samples; ++k) {
      Rng rng(derive_seed(opts.seed, tag_of("extension")), static_cast<std::uint64_t>(de * 1000 + k));
      out.push_back({extension_of(qs, "E", de, rng).op(), de});
    }
  if (opts.separable) {
    // Classical flag on E storing the term index.
    const SeparableDecomposition& s = *opts.separable;
    if (s.layout != rho.layout()) throw LayoutError("extensions: decomposition layout mismatch");
    const int kk = s.terms();
    const int d = rho.dim();
    Mat acc = Mat::Zero(d * kk, d * kk);
    for (int k = 0; k < kk; ++k) {
      SeparableDecomposition one = s;
      one.weights = {1.0};
      one.vectors = {s.vectors[k]};
      Mat e = Mat::Zero(kk, kk);
      e(k, k) = 1.0;
      acc += s.weights[k] * kron(one.assemble_mat(), e);
    }
    out.push_back({LabeledOperator(rho.layout().concat(SystemLayout({"E"}, {kk})), acc), kk});
  }
  return out;
}

}  // namespace

ExtensionValue squashed_upper(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b,
                              const ExtensionOptions& opts) {
  const std::vector<Extension> ext = sample_extensions(marginal(rho, [&] {
    LabelSet u = a;
    u.insert(u.end(), b.begin(), b.end());
    return u;
  }()), opts);
  ExtensionValue best;
  best.value = kInf;
  for (const auto& e : ext) {
    const double v = 0.5 * cqmi(e.op, a, b, {"E"});
    ++best.evaluated;
    if (v < best.value) {
      best.value = v;
      best.extension = e.op;
    }
  }
  return best;
}

ExtensionValue cemi_upper(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b,
                          const ExtensionOptions& opts) {
  LabelSet ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const LabeledOperator rab = marginal(rho, ab);
  const std::vector<Extension> ext = sample_extensions(rab, opts);
  ExtensionValue best;
  best.value = kInf;
  for (const auto& e : ext) {
    // Every factorization E = Ā⊗B̄ of the extension dimension.
    std::vector<std::pair<int, int>> splits;
    if (opts.separable && e.de == opts.separable->terms() && &e == &ext.back()) {
      // Flag extension: copy the flag to both sides.
      const int kk = e.de;
      const int d = rab.dim();
      Mat acc = Mat::Zero(d * kk * kk, d * kk * kk);
      const Mat& m = e.op.mat();
      for (int k = 0; k < kk; ++k) {
        CVec f = CVec::Zero(kk * kk);
        f(k * kk + k) = 1.0;
        // Block (k,k) of the flagged state.
        Mat blk(d, d);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) blk(i, j) = m(i * kk + k, j * kk + k);
        acc += kron(blk, Mat(f * f.adjoint()));
      }
      const SystemLayout l = rab.layout().concat(SystemLayout({"Abar", "Bbar"}, {kk, kk}));
      const double v = 0.5 * cemi_term(LabeledOperator(l, acc), a, {"Abar"}, b, {"Bbar"});
      ++best.evaluated;
      if (v < best.value) {
        best.value = v;
        best.extension = LabeledOperator(l, acc);
      }
      continue;
    }
    for (int da = 1; da <= e.de; ++da)
      if (e.de % da == 0) splits.push_back({da, e.de / da});
    for (const auto& [da, db] : splits) {
      const SystemLayout l = rab.layout().concat(SystemLayout({"Abar", "Bbar"}, {da, db}));
      const LabeledOperator op(l, e.op.mat());
      const double v = 0.5 * cemi_term(op, a, {"Abar"}, b, {"Bbar"});
      ++best.evaluated;
      if (v < best.value) {
        best.value = v;
        best.extension = op;
      }
    }
  }
  return best;
}

}  // namespace entlab
