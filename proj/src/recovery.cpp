#include "entlab/recovery.hpp"

#include <cmath>
#include <numbers>

#include "entlab/linop.hpp"
#include "entlab/parallel.hpp"

namespace entlab {

namespace {

SystemLayout layout_of(const SystemLayout& base, const LabelSet& labels) {
  std::vector<int> dims;
  for (const auto& l : labels) dims.push_back(base.dim_of(l));
  return {labels, dims};
}

LabelSet joined(LabelSet a, const LabelSet& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Sum of per-node matrices in node order (deterministic for any thread count).
Mat ordered_sum(const std::vector<Mat>& parts) {
  Mat acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc += parts[i];
  return acc;
}

// (1 ⊗ v†) m (1 ⊗ v) for m on [keep, v-system].
Mat contract_last(const Mat& m, const CVec& v, int keep) {
  const Mat p = kron(Mat::Identity(keep, keep), Mat(v));
  return p.adjoint() * m * p;
}

}  // namespace

double beta0_density(double t) {
  return (std::numbers::pi / 2.0) / (std::cosh(std::numbers::pi * t) + 1.0);
}

QuadratureRule beta0_rule(int n, double truncation) {
  if (n < 3 || n % 2 == 0) throw ParameterError("beta0_rule: node count must be odd and at least 3");
  if (!(truncation > 0.0)) throw ParameterError("beta0_rule: truncation must be positive");
  QuadratureRule r;
  r.truncation = truncation;
  const double h = 2.0 * truncation / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double t = -truncation + i * h;
    r.nodes.push_back(t);
    r.weights.push_back(h * beta0_density(t));
  }
  return r;
}

RecoveryMap::RecoveryMap(SystemLayout anchor_layout, LabelSet source, LabelSet added, double t, Mat k,
                         Mat source_support)
    : anchor_(std::move(anchor_layout)),
      source_(std::move(source)),
      added_(std::move(added)),
      t_(t),
      k_(std::move(k)),
      support_(std::move(source_support)) {}

SystemLayout RecoveryMap::output_layout(const SystemLayout& in) const {
  for (const auto& l : source_) {
    if (!in.has(l)) throw CompositionError("recovery: input lacks source label '" + l + "'");
    if (in.dim_of(l) != anchor_.dim_of(l)) throw CompositionError("recovery: dimension mismatch on '" + l + "'");
  }
  for (const auto& l : added_)
    if (in.has(l)) throw CompositionError("recovery: input already holds label '" + l + "'");
  return in.concat(layout_of(anchor_, added_));
}

LabeledOperator RecoveryMap::left(const LabeledOperator& x) const {
  const SystemLayout out = output_layout(x.layout());
  const Mat ke = embed_mat(LabeledOperator(anchor_, k_), out);
  return {out, ke * embed_mat(x, out)};
}

LabeledOperator RecoveryMap::apply(const LabeledOperator& x) const {
  const SystemLayout out = output_layout(x.layout());
  const Mat ke = embed_mat(LabeledOperator(anchor_, k_), out);
  return {out, ke * embed_mat(x, out) * ke.adjoint()};
}

Mat RecoveryMap::choi() const {
  const SystemLayout in = layout_of(anchor_, source_);
  const int ds = in.total_dim();
  const int dout = anchor_.total_dim();
  Mat j = Mat::Zero(ds * dout, ds * dout);
  for (int a = 0; a < ds; ++a)
    for (int b = 0; b < ds; ++b) {
      Mat e = Mat::Zero(ds, ds);
      e(a, b) = 1.0;
      j.block(a * dout, b * dout, dout, dout) = apply(LabeledOperator(in, e)).mat();
    }
  return j;
}

double RecoveryMap::tp_deviation() const {
  const LabeledOperator kk(anchor_, k_.adjoint() * k_);
  return max_abs(partial_trace(kk, added_).mat() - support_);
}

PetzFamily::PetzFamily(const LabeledOperator& anchor, const LabelSet& source) : anchor_(anchor.layout()) {
  require_labels(anchor_, source);
  if (!anchor.hermitian(1e-10)) throw ContractViolation("petz: anchor is not Hermitian");
  source_ = anchor_.restricted_to(source).labels();
  added_ = anchor_.complement(source_);
  source_layout_ = anchor_.restricted_to(source_);
  full_ = eigh(hermitian_part(anchor.mat()));
  if (full_.dim() > 0 && full_.values(0) < -1e-10 * std::max(full_.max_abs_value(), 1.0))
    throw DomainError("petz: anchor has negative spectrum");
  marg_ = eigh(hermitian_part(marginal(anchor, source_).mat()));
}

RecoveryMap PetzFamily::at(double t) const {
  const Complex z(0.5, 0.5 * t);
  const Mat inv = embed_mat(LabeledOperator(source_layout_, power_on_support(marg_, -z)), anchor_);
  return {anchor_, source_, added_, t, power_on_support(full_, z) * inv, support_projector(marg_)};
}

RecoveryMap rotated_petz(const LabeledOperator& anchor, const LabelSet& source, double t) {
  return PetzFamily(anchor, source).at(t);
}

LabeledOperator recover_at(const RecoveryPlan& plan, double t, const LabeledOperator& input) {
  LabeledOperator x = input;
  for (const auto& f : plan) x = f.at(t).apply(x);
  return x;
}

LabeledOperator averaged_recover(const RecoveryPlan& plan, const QuadratureRule& rule,
                                 const LabeledOperator& input) {
  const int n = rule.count();
  if (n == 0) throw ParameterError("averaged_recover: empty rule");
  std::vector<Mat> parts(n);
  std::vector<SystemLayout> layouts(n);
  parallel_for(n, [&](int i) {
    LabeledOperator y = recover_at(plan, rule.nodes[i], input);
    parts[i] = rule.weights[i] * y.mat();
    layouts[i] = y.layout();
  });
  return {layouts.front(), ordered_sum(parts)};
}

std::vector<double> node_fidelities(const RecoveryPlan& plan, const QuadratureRule& rule,
                                    const LabeledOperator& input, const LabeledOperator& target) {
  const int n = rule.count();
  std::vector<double> out(n);
  const LabeledOperator root(input.layout(), sqrt_psd(hermitian_part(input.mat())));
  parallel_for(n, [&](int i) {
    // R_t(X) = M M† with M = K_n⋯K_1(√X ⊗ 1), so F = (Σ √eig(M†ρM))².
    LabeledOperator m = root;
    for (const auto& f : plan) m = f.at(rule.nodes[i]).left(m);
    const Mat rho = reorder(target, m.layout().labels()).mat();
    const Mat q = hermitian_part(m.mat().adjoint() * rho * m.mat());
    const RVec ev = eigh(q).values;
    double s = 0.0;
    for (Eigen::Index k = 0; k < ev.size(); ++k) s += std::sqrt(std::max(ev(k), 0.0));
    out[i] = s * s;
  });
  return out;
}

double fidelity_bound(const QuadratureRule& rule, const std::vector<double>& fidelities) {
  if (fidelities.size() != rule.weights.size()) throw ParameterError("fidelity_bound: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < fidelities.size(); ++i)
    acc -= rule.weights[i] * std::log(std::max(fidelities[i], 1e-300));
  return acc;
}

double transpose_twirl_identity(const LabeledOperator& anchor, const LabelSet& source, double t) {
  const RecoveryMap r = PetzFamily(anchor, source).at(t);
  const RecoveryMap rt = PetzFamily(LabeledOperator(anchor.layout(), anchor.mat().transpose()), source).at(-t);
  const SystemLayout in = layout_of(anchor.layout(), r.source());
  const int ds = in.total_dim();
  const int dout = anchor.dim();
  Mat j1 = Mat::Zero(ds * dout, ds * dout), j2 = j1;
  for (int a = 0; a < ds; ++a)
    for (int b = 0; b < ds; ++b) {
      Mat e = Mat::Zero(ds, ds);
      e(a, b) = 1.0;
      j1.block(a * dout, b * dout, dout, dout) = r.apply(LabeledOperator(in, e)).mat().transpose();
      j2.block(a * dout, b * dout, dout, dout) = rt.apply(LabeledOperator(in, e.transpose())).mat();
    }
  return max_abs(j1 - j2);
}

// ---- classical-quantum operators ------------------------------------------

namespace {

LabelSet cq_rest(const CqOperator& x) { return x.layout.complement({x.classical}); }

SystemLayout cq_ordered(const CqOperator& x) {
  return layout_of(x.layout, joined(cq_rest(x), {x.classical}));
}

Mat cq_sum(const CqOperator& x, const std::vector<Mat>& blocks) {
  const SystemLayout ord = cq_ordered(x);
  Mat acc = Mat::Zero(ord.total_dim(), ord.total_dim());
  for (std::size_t k = 0; k < blocks.size(); ++k)
    acc += kron(blocks[k], Mat(x.basis[k] * x.basis[k].adjoint()));
  return reorder(LabeledOperator(ord, acc), x.layout.labels()).mat();
}

}  // namespace

Mat CqOperator::assemble() const { return cq_sum(*this, blocks); }

Mat CqOperator::power(Complex z) const {
  std::vector<Mat> p;
  for (const auto& b : blocks) p.push_back(power_on_support(hermitian_part(b), z));
  return cq_sum(*this, p);
}

void CqOperator::validate(double tol) const {
  if (!layout.has(classical)) throw CertificateError("cq: classical label missing from layout");
  const int dc = layout.dim_of(classical);
  const int dr = layout.dim_of(cq_rest(*this));
  if (static_cast<int>(basis.size()) != dc || blocks.size() != basis.size())
    throw CertificateError("cq: basis must be complete with one block per vector");
  for (int a = 0; a < dc; ++a) {
    if (basis[a].size() != dc) throw CertificateError("cq: basis vector has wrong dimension");
    for (int b = 0; b < dc; ++b)
      if (std::abs(basis[a].dot(basis[b]) - (a == b ? 1.0 : 0.0)) > tol)
        throw CertificateError("cq: basis is not orthonormal");
  }
  for (const auto& blk : blocks) {
    if (blk.rows() != dr || blk.cols() != dr) throw CertificateError("cq: block has wrong dimension");
    if (!is_hermitian(blk, 1e-10) || min_eigenvalue(blk) < -tol) throw CertificateError("cq: block is not PSD");
  }
}

// ---- γ constructions --------------------------------------------------------

namespace {

struct SqSetup {
  LabelSet a, c;
  Label bp;
  SystemLayout acb;  // [A..., C..., B']
  int da = 1, dc = 1, db = 1;
};

SqSetup sq_setup(const LabeledOperator& rho_bpc, const LabelSet& c, const SystemLayout& sigma_layout,
                 const CqOperator& x) {
  SqSetup s;
  s.bp = x.classical;
  s.a = cq_rest(x);
  const SystemLayout anchor = rho_bpc.layout();
  require_labels(anchor, c);
  s.c = sigma_layout.complement(s.a);
  if (anchor.complement(c) != LabelSet{s.bp})
    throw CompositionError("gamma: the recovery map must add exactly the classical label of X");
  for (const auto& l : s.a)
    if (!sigma_layout.has(l) || sigma_layout.dim_of(l) != x.layout.dim_of(l))
      throw CompositionError("gamma: sigma lacks system '" + l + "' of X");
  if (layout_of(sigma_layout, s.c).labels().size() != c.size())
    throw CompositionError("gamma: sigma must live on the A systems of X and the source of the map");
  for (const auto& l : c)
    if (!sigma_layout.has(l)) throw CompositionError("gamma: sigma lacks source label '" + l + "'");
  if (anchor.dim_of(s.bp) != x.layout.dim_of(s.bp)) throw CompositionError("gamma: B' dimension mismatch");
  std::vector<int> dims;
  for (const auto& l : s.a) dims.push_back(x.layout.dim_of(l));
  for (const auto& l : s.c) dims.push_back(sigma_layout.dim_of(l));
  dims.push_back(anchor.dim_of(s.bp));
  s.acb = SystemLayout(joined(joined(s.a, s.c), {s.bp}), dims);
  s.da = x.layout.dim_of(s.a);
  s.dc = sigma_layout.dim_of(s.c);
  s.db = anchor.dim_of(s.bp);
  return s;
}

}  // namespace

SqGamma gamma_construction(const LabeledOperator& rho_bpc, const LabelSet& c, const SeparableDecomposition& sigma_ac,
                           const CqOperator& x, const QuadratureRule& rule, bool decompose) {
  x.validate();
  const LabeledOperator sigma = sigma_ac.assemble();
  const SqSetup s = sq_setup(rho_bpc, c, sigma.layout(), x);
  const PetzFamily fam(rho_bpc, c);
  const int n = rule.count();
  const int nx = static_cast<int>(x.basis.size());

  std::vector<Mat> gx(n), num(n);
  parallel_for(n, [&](int i) {
    const Complex z(0.5, 0.5 * rule.nodes[i]);
    const LabeledOperator g = reorder(fam.at(rule.nodes[i]).apply(sigma), s.acb.labels());
    const LabeledOperator ab = partial_trace(g, s.c);  // [A..., B']
    gx[i] = rule.weights[i] * reorder(ab, x.layout.labels()).mat();
    Mat acc = Mat::Zero(s.da * s.dc, s.da * s.dc);
    for (int k = 0; k < nx; ++k) {
      const Mat fz = kron(power_on_support(hermitian_part(x.blocks[k]), z), Mat::Identity(s.dc, s.dc));
      acc += fz * contract_last(g.mat(), x.basis[k], s.da * s.dc) * fz.adjoint();
    }
    num[i] = rule.weights[i] * acc;
  });

  SqGamma out;
  out.gamma_x = LabeledOperator(x.layout, hermitian_part(ordered_sum(gx)));
  const SystemLayout ac = layout_of(s.acb, joined(s.a, s.c));
  out.numerator = LabeledOperator(ac, hermitian_part(ordered_sum(num)));
  out.norm = (x.assemble() * out.gamma_x.mat()).trace().real();
  if (!(out.norm > 0.0)) throw DomainError("gamma: tr[X γ] is not positive");
  out.gamma_hat = LabeledOperator(ac, out.numerator.mat() / out.norm);

  if (decompose) {
    // σ = Σ_k p_k α_k ⊗ κ_k pushes through term by term.
    if (sigma_ac.groups.size() != 2) throw CompositionError("gamma: sigma must be bipartite A:C");
    int ga = -1;
    for (int g = 0; g < 2; ++g) {
      LabelSet sorted = layout_of(sigma.layout(), sigma_ac.groups[g]).labels();
      if (sigma.layout().restricted_to(sorted).labels() == s.a) ga = g;
    }
    if (ga < 0) throw CompositionError("gamma: sigma groups do not match the A systems of X");
    const int gc = 1 - ga;
    const SystemLayout a_grp = layout_of(sigma.layout(), sigma_ac.groups[ga]);
    const SystemLayout c_grp = layout_of(sigma.layout(), sigma_ac.groups[gc]);
    const int terms = sigma_ac.terms();
    std::vector<std::vector<double>> wx(n), wh(n);
    std::vector<std::vector<std::vector<Mat>>> fx(n), fh(n);
    parallel_for(n, [&](int i) {
      const Complex z(0.5, 0.5 * rule.nodes[i]);
      const RecoveryMap r = fam.at(rule.nodes[i]);
      std::vector<Mat> fzs;
      for (int k = 0; k < nx; ++k) fzs.push_back(power_on_support(hermitian_part(x.blocks[k]), z));
      for (int k = 0; k < terms; ++k) {
        const CVec& va = sigma_ac.vectors[k][ga];
        const CVec& vc = sigma_ac.vectors[k][gc];
        const Mat alpha = reorder(LabeledOperator(a_grp, va * va.adjoint()), s.a).mat();
        const LabeledOperator rc = reorder(r.apply(LabeledOperator(c_grp, vc * vc.adjoint())),
                                           joined(c_grp.labels(), {s.bp}));
        const double w = rule.weights[i] * sigma_ac.weights[k];
        wx[i].push_back(w);
        fx[i].push_back({alpha, partial_trace(rc, c_grp.labels()).mat()});
        for (int xi = 0; xi < nx; ++xi) {
          wh[i].push_back(w / out.norm);
          fh[i].push_back({fzs[xi] * alpha * fzs[xi].adjoint(),
                           contract_last(rc.mat(), x.basis[xi], c_grp.total_dim())});
        }
      }
    });
    std::vector<double> wxa, wha;
    std::vector<std::vector<Mat>> fxa, fha;
    for (int i = 0; i < n; ++i) {
      wxa.insert(wxa.end(), wx[i].begin(), wx[i].end());
      fxa.insert(fxa.end(), fx[i].begin(), fx[i].end());
      wha.insert(wha.end(), wh[i].begin(), wh[i].end());
      fha.insert(fha.end(), fh[i].begin(), fh[i].end());
    }
    const SystemLayout xa = layout_of(x.layout, joined(s.a, {s.bp}));
    out.dec_x = SeparableDecomposition::from_products(xa, {s.a, {s.bp}}, wxa, fxa);
    for (auto& fc : fha) fc[1] = reorder(LabeledOperator(c_grp, fc[1]), s.c).mat();
    out.dec_hat = SeparableDecomposition::from_products(ac, {s.a, s.c}, wha, fha);
  }
  return out;
}

LabeledOperator gamma_numerator_double_sum(const LabeledOperator& rho_bpc, const LabelSet& c,
                                           const LabeledOperator& sigma_ac, const CqOperator& x,
                                           const QuadratureRule& rule) {
  const SqSetup s = sq_setup(rho_bpc, c, sigma_ac.layout(), x);
  const PetzFamily fam(rho_bpc, c);
  const int n = rule.count();
  std::vector<Mat> num(n);
  parallel_for(n, [&](int i) {
    const Complex z(0.5, 0.5 * rule.nodes[i]);
    const LabeledOperator xz(x.layout, x.power(z));
    const Mat xe = embed_mat(xz, s.acb);
    const LabeledOperator g = reorder(fam.at(rule.nodes[i]).apply(sigma_ac), s.acb.labels());
    const LabeledOperator full(s.acb, xe * g.mat() * xe.adjoint());
    num[i] = rule.weights[i] * partial_trace(full, {s.bp}).mat();
  });
  return {layout_of(s.acb, joined(s.a, s.c)), hermitian_part(ordered_sum(num))};
}

namespace {

LabelSet plan_added(const RecoveryPlan& maps) {
  LabelSet out;
  for (const auto& m : maps) out = joined(out, m.added());
  return out;
}

}  // namespace

CemiGamma cemi_gamma(const RecoveryPlan& maps, const LabeledOperator& sigma, const LabeledOperator& x,
                     const QuadratureRule& rule) {
  const LabelSet added = plan_added(maps);
  bool on_added = x.layout().size() == added.size();
  for (const auto& l : added) on_added = on_added && x.layout().has(l);
  if (!on_added) throw CompositionError("cemi_gamma: X must live exactly on the added systems");
  CemiGamma out;
  out.gamma = averaged_recover(maps, rule, sigma);
  out.gamma = LabeledOperator(out.gamma.layout(), hermitian_part(out.gamma.mat()));
  out.gamma_x = partial_trace(out.gamma, sigma.layout().labels());
  const LabeledOperator xr = reorder(x, out.gamma_x.layout().labels());
  out.norm = (xr.mat() * out.gamma_x.mat()).trace().real();
  if (!(out.norm > 0.0)) throw DomainError("cemi_gamma: tr[X γ] is not positive");
  const Mat xe = embed_mat(xr, out.gamma.layout());
  out.numerator = partial_trace(LabeledOperator(out.gamma.layout(), xe * out.gamma.mat()), added);
  out.numerator = LabeledOperator(out.numerator.layout(), hermitian_part(out.numerator.mat()));
  out.gamma_hat = LabeledOperator(out.numerator.layout(), out.numerator.mat() / out.norm);
  return out;
}

SeparableDecomposition cemi_gamma_hat_decomposition(const RecoveryPlan& maps, const SeparableDecomposition& sigma,
                                                    const std::vector<double>& x_weights,
                                                    const std::vector<std::vector<CVec>>& x_factors,
                                                    const QuadratureRule& rule) {
  const std::size_t ng = maps.size();
  if (sigma.groups.size() != ng) throw CompositionError("cemi_gamma: one sigma group per map expected");
  if (x_weights.size() != x_factors.size()) throw ParameterError("cemi_gamma: X weight/factor mismatch");
  // Group g must be the source of map g (as a set).
  std::vector<SystemLayout> grp(ng);
  for (std::size_t g = 0; g < ng; ++g) {
    grp[g] = layout_of(sigma.layout, sigma.groups[g]);
    if (sigma.layout.restricted_to(sigma.groups[g]).labels() != maps[g].source())
      throw CompositionError("cemi_gamma: sigma group does not match the map source");
    for (const auto& xf : x_factors)
      if (xf.size() != ng || xf[g].size() != maps[g].anchor_layout().dim_of(maps[g].added()))
        throw ParameterError("cemi_gamma: X factor dimension mismatch");
  }
  const int n = rule.count();
  const int terms = sigma.terms();
  const int nj = static_cast<int>(x_weights.size());
  std::vector<std::vector<double>> w(n);
  std::vector<std::vector<std::vector<Mat>>> f(n);
  parallel_for(n, [&](int i) {
    std::vector<RecoveryMap> r;
    for (const auto& m : maps) r.push_back(m.at(rule.nodes[i]));
    for (int k = 0; k < terms; ++k) {
      std::vector<Mat> out_g(ng);
      for (std::size_t g = 0; g < ng; ++g) {
        const CVec& v = sigma.vectors[k][g];
        out_g[g] = r[g].apply(LabeledOperator(grp[g], v * v.adjoint())).mat();
      }
      for (int j = 0; j < nj; ++j) {
        std::vector<Mat> fac(ng);
        for (std::size_t g = 0; g < ng; ++g) fac[g] = contract_last(out_g[g], x_factors[j][g], grp[g].total_dim());
        w[i].push_back(rule.weights[i] * sigma.weights[k] * x_weights[j]);
        f[i].push_back(std::move(fac));
      }
    }
  });
  std::vector<double> wa;
  std::vector<std::vector<Mat>> fa;
  for (int i = 0; i < n; ++i) {
    wa.insert(wa.end(), w[i].begin(), w[i].end());
    fa.insert(fa.end(), f[i].begin(), f[i].end());
  }
  return SeparableDecomposition::from_products(sigma.layout, sigma.groups, wa, fa);
}

}  // namespace entlab
