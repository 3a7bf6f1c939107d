#include "entlab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <regex>
#include <sstream>

#include "entlab/linop.hpp"
#include "entlab/parallel.hpp"
#include "entlab/random.hpp"
#include "entlab/recovery.hpp"

namespace entlab {

const char* to_string(Soundness s) { return s == Soundness::Strict ? "strict" : "heuristic"; }

EntOptions CheckConfig::desk_options() {
  EntOptions o;
  o.restarts = 2;
  o.iterations = 200;
  o.outer = 6;
  o.oracle_starts = 6;
  o.inner = SolverBudget{2, 120, 0, 15, 30, 12};
  o.cone = ConeOptions{40, 4, 0, nullptr};
  return o;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SystemLayout qubits(const LabelSet& labels) { return {labels, std::vector<int>(labels.size(), 2)}; }

const LabelSet kTri{"A", "B", "C"};
const LabelSet kFour{"A", "Ab", "B", "Bb"};
const LabelSet kSix{"A", "Ab", "B", "Bb", "C", "Cb"};
const LabelSet kSqMulti{"A1", "A2", "A3", "C"};

std::vector<CheckSpec> build_registry() {
  std::vector<CheckSpec> r;
  auto add = [&](std::string id, std::string quote, std::string statement, SystemLayout layout, InputKind in,
                 Soundness s, bool identity, std::string note) {
    r.push_back({std::move(id), std::move(quote), std::move(statement), std::move(layout), in, s, identity,
                 std::move(note)});
  };
  const auto S = Soundness::Strict;
  const auto H = Soundness::Heuristic;
  add("ssa", "corresponds to a strengthening of SSA", "I(A:B|C) >= 0", qubits(kTri), InputKind::State, S, false,
      "entropies only");
  add("exp_state", "Umegaki's quantum relative entropy",
      "I(A:B|C) = D(rho || exp(log rho_AC + log rho_BC - log rho_C))", qubits(kTri), InputKind::State, S, true,
      "spectral identity; requires rho_C of full rank");
  add("classical", "output of a recovery channel",
      "I(X:Y|Z) = D(P || P_{Y|Z} P_XZ) = D(P || P_Z P_{X|Z} P_{Y|Z})", SystemLayout({"X", "Y", "Z"}, {2, 2, 2}),
      InputKind::Pmf, S, true, "finite sums");
  add("markov_zero", "induced direct sum decomposition",
      "Markov states: I(A:B|C) = 0 and the averaged rotated Petz map recovers rho", SystemLayout({"A", "C", "B"}, {2, 4, 2}),
      InputKind::State, S, true, "recovery layer at trace distance");
  for (int n = 2; n <= 6; ++n)
    for (int p = 1; p <= 2; ++p)
      add("gt_multi(" + std::to_string(n) + "," + std::to_string(p) + ")", "denotes the Schatten $p$-norm",
          "int dbeta0 log||prod_k exp((1+it)H_k)||_p >= log||exp(sum_k H_k)||_p", SystemLayout({"H"}, {3}),
          InputKind::Hermitians, S, false, "quadrature of an analytic integrand; cross-checked at 2N-1 nodes");
  add("pb", "Peierls-Bogoliubov inequality for Hermitian",
      "-tr[G2 exp G1] >= -log tr exp(G1 + G2) with tr exp G1 = 1", SystemLayout({"H"}, {3}), InputKind::Hermitians, S,
      false, "exact spectral evaluation");
  for (int n = 1; n <= 3; ++n)
    add("achiev_sandwich(" + std::to_string(n) + ")", "invariant under permutations of the",
        "D_pinch(rho^n || sigma^n) >= D(rho^n || sigma^n) - log|spec(sigma^n)|", qubits({"A"}), InputKind::State, S,
        false, "pinched measurement value is exact and a lower bound on D_ALL");
  add("cqmi_recovery_fid", "Donald's measured relative entropy",
      "I(A:B|C) >= -int dbeta0 log F(rho, R_t(rho_AC)), R_t: C -> BC", qubits(kTri), InputKind::State, S, false,
      "exact fidelities per node");
  add("sq_main", "be any tripartite state", "I(A:B|C) >= E_LOCC1(B->A) - {E(A:C) - E_ALL(A:C)}", qubits(kTri),
      InputKind::State, H, false, "best-found optimizer values; the five-matrix witness chain is strict");
  add("sq_chain", "Pinsker type inequalities",
      "D_LOCC1(rho||s*) >= -log F_LOCC1(rho,s*) >= 1/4 ||rho - s*||^2_LOCC1 at the E_LOCC1 witness s*",
      qubits({"A", "B"}), InputKind::State, H, false, "candidate-measurement estimates; the ALL link is strict");
  add("state_redistribution", "three matrix Golden-Thompson inequality", "I(A:B|C) >= E_ALL(A:BC) - E(A:C)",
      qubits(kTri), InputKind::State, H, false, "E term best-found, D_ALL term lower; witness chain strict");
  add("post_li_winter", "the stronger single-copy version", "E(A:BC) >= E_LOCC1(B->A) + E_ALL(A:C)", qubits(kTri),
      InputKind::State, H, false, "best-found values; three-matrix witness chain strict");
  add("cemi_recover_meas", "with local quantum channels",
      "I(A|Ab:B|Bb) >= D_ALL(rho || int dbeta0 (R_t x R_t)(rho_AbBb))", qubits(kFour), InputKind::State, H, false,
      "D_ALL from the variational solver (a lower estimate)");
  add("cemi_recover_fid", "with local quantum channels",
      "I(A|Ab:B|Bb) >= -int dbeta0 log F(rho, (R_t x R_t)(rho_AbBb))", qubits(kFour), InputKind::State, S, false,
      "exact fidelities per node");
  add("cemi_main", "strengthened lower bound in terms",
      "I(A|Ab:B|Bb) >= E_SEPP(A:B) - {E(Ab:Bb) - E_ALL(Ab:Bb)}", qubits(kFour), InputKind::State, H, false,
      "best-found values; four-matrix witness chain strict");
  add("cemi_ppt", "we can derive PPT bounds", "I(A|Ab:B|Bb) >= P_PPT(A:B) - {P(Ab:Bb) - P_ALL(Ab:Bb)}", qubits(kFour),
      InputKind::State, H, false, "best-found values; four-matrix chain and transpose identity strict");
  add("piani_cemi", "asymptotic achievability of partial state merging",
      "I(A|Ab:B|Bb) >= E_ALL(AAb:BBb) - E(Ab:Bb)", qubits(kFour), InputKind::State, H, false,
      "best-found values; recovered-witness chain strict");
  add("piani_superadd_sepp", "compatible with the set of states", "E(AAb:BBb) >= E_SEPP(A:B) + E(Ab:Bb)",
      qubits(kFour), InputKind::State, H, false, "best-found values on both sides");
  add("piani_superadd_ppt", "compatible with the set of states", "P(AAb:BBb) >= P_PPT(A:B) + P(Ab:Bb)",
      qubits(kFour), InputKind::State, H, false, "best-found values on both sides");
  add("cemi_multi_recover", "resolve a conjecture from",
      "I(A|Ab:B|Bb:C|Cb) >= -int dbeta0 log F(rho, (R_t x R_t x R_t)(rho_AbBbCb))", qubits(kSix), InputKind::State, S,
      false, "exact fidelities per node");
  add("cemi_multi_faithful", "six-party state",
      "I(A|Ab:B|Bb:C|Cb) >= E_SEPP(A:B:C) - {E(Ab:Bb:Cb) - E_ALL(Ab:Bb:Cb)} (and the PPT analogue)", qubits(kSix),
      InputKind::State, H, false, "best-found values; four-matrix witness chain strict");
  add("squashed_multi_recover", "other orderings are possible",
      "I(A1:A2:A3|C) >= -int dbeta0 log F(rho, (R_t^{C->A3C} o R_t^{C->A2C})(rho_A1C))", qubits(kSqMulti),
      InputKind::State, S, false, "fidelity form strict; measured form reported as a heuristic layer");
  add("locc1_dpi", "monotone under", "D_LOCC1(rho||sigma) >= D_LOCC1(G(rho)||G(sigma)) for one-way LOCC G",
      qubits({"A", "B"}), InputKind::State, H, false, "pulled-back measurement identity strict");
  return r;
}

// ---- numeric helpers ---------------------------------------------------------

// X + rel·(tr X/d)·1: full rank, and stays in any cone containing the identity.
Mat ridge(const Mat& x, double rel = 1e-9) {
  const Eigen::Index d = x.rows();
  const double t = std::max(std::abs(x.trace().real()), 1e-300);
  return hermitian_part(x) + (rel * t / static_cast<double>(d)) * Mat::Identity(d, d);
}

double tr_log(const Mat& rho, const Mat& x) { return (rho * log_on_support(hermitian_part(x))).trace().real(); }

LabeledOperator as(const LabeledOperator& x, const LabeledOperator& like) {
  return reorder(x, like.layout().labels());
}

LabeledOperator herm(const LabeledOperator& x) { return {x.layout(), hermitian_part(x.mat())}; }

SystemLayout sub_layout(const SystemLayout& base, const LabelSet& labels) {
  std::vector<int> dims;
  for (const auto& l : labels) dims.push_back(base.dim_of(l));
  return {labels, dims};
}

// V: C^d → C^d ⊗ C^d, |b⟩ ↦ |b⟩|0⟩ (the Naimark embedding of the LOCC₁ solver).
Mat embedding(int d) {
  Mat v = Mat::Zero(d * d, d);
  for (int b = 0; b < d; ++b) v(b * d, b) = 1.0;
  return v;
}

// Conjugates system `from` by V or V† (moved last, then restored) and renames it.
LabeledOperator reembed(const LabeledOperator& x, const Label& from, const Label& to, bool up) {
  const SystemLayout& l = x.layout();
  const int df = l.dim_of(from);
  const int d = up ? df : static_cast<int>(std::lround(std::sqrt(static_cast<double>(df))));
  if (!up && d * d != df) throw LayoutError("narrow: system dimension is not a square");
  LabelSet labels = l.complement({from});
  std::vector<int> dims;
  for (const auto& s : labels) dims.push_back(l.dim_of(s));
  LabelSet order = labels;
  order.push_back(from);
  const Mat m = reorder(x, order).mat();
  const int rest = x.dim() / df;
  const Mat v = kron(Mat(Mat::Identity(rest, rest)), embedding(d));
  labels.push_back(to);
  dims.push_back(up ? d * d : d);
  const LabeledOperator y(SystemLayout(labels, dims), up ? Mat(v * m * v.adjoint()) : Mat(v.adjoint() * m * v));
  LabelSet back = l.labels();
  std::replace(back.begin(), back.end(), from, to);
  return reorder(y, back);
}

LabeledOperator widen(const LabeledOperator& x, const Label& b, const Label& bp) { return reembed(x, b, bp, true); }
LabeledOperator narrow(const LabeledOperator& x, const Label& bp, const Label& b) { return reembed(x, bp, b, false); }

// 1 ⊗ Σ_x |x⟩⟨x| on [rest..., bp] with bp classical in the computational basis.
CqOperator identity_cq(const SystemLayout& layout, const Label& bp) {
  CqOperator x;
  x.layout = layout;
  x.classical = bp;
  const int dc = layout.dim_of(bp);
  const int dr = layout.total_dim() / dc;
  for (int i = 0; i < dc; ++i) {
    x.basis.push_back(CVec::Unit(dc, i));
    x.blocks.push_back(Mat::Identity(dr, dr));
  }
  return x;
}

// CQ operator Σ_x F^x ⊗ |u_x⟩⟨u_x| on [second..., bp] from an LOCC₁ witness on
// a single `first` system: u_x are the Naimark columns and F^x = Σ_z r_xz P^{z|x}
// with the likelihood ratios r = p/q of the witness on (ρ, σ). Columns without
// an outcome and tiny ratios are floored so that X has full rank.
CqOperator cq_from_locc1(const Measurement& m, const LabeledOperator& rho, const LabeledOperator& sigma,
                         const Label& bp) {
  if (m.cls != MeasClass::LOCC1 || m.first.size() != 1 || m.conditional.empty())
    throw ContractViolation("cq_from_locc1: needs an LOCC1 witness on a single first system");
  const int nx = static_cast<int>(m.conditional.size());
  const int d = m.layout.dim_of(m.first.front());
  const int ds = m.layout.dim_of(m.second);
  if (m.naimark_first.cols() != d * d || nx > d * d)
    throw ContractViolation("cq_from_locc1: Naimark unitary does not match the first system");
  std::vector<std::vector<double>> ratio(nx);
  double rmax = 0.0;
  std::size_t k = 0;
  for (int i = 0; i < nx; ++i)
    for (std::size_t z = 0; z < m.conditional[i].size(); ++z, ++k) {
      const double p = std::max((rho.mat() * m.elements.at(k)).trace().real(), 0.0);
      const double q = std::max((sigma.mat() * m.elements.at(k)).trace().real(), 0.0);
      ratio[i].push_back(q > 1e-300 ? p / q : -1.0);
      rmax = std::max(rmax, ratio[i].back());
    }
  if (!(rmax > 0.0)) rmax = 1.0;
  const double floor = 1e-9 * rmax;
  CqOperator x;
  x.classical = bp;
  LabelSet labels = m.second;
  std::vector<int> dims;
  for (const auto& l : labels) dims.push_back(m.layout.dim_of(l));
  labels.push_back(bp);
  dims.push_back(d * d);
  x.layout = SystemLayout(labels, dims);
  for (int i = 0; i < d * d; ++i) {
    x.basis.push_back(m.naimark_first.col(i));
    Mat f = floor * Mat::Identity(ds, ds);
    if (i < nx)
      for (std::size_t z = 0; z < m.conditional[i].size(); ++z) {
        const double r = ratio[i][z] < 0 ? rmax : ratio[i][z];
        f += r * hermitian_part(m.conditional[i][z]);
      }
    x.blocks.push_back(hermitian_part(f));
  }
  return x;
}

// ---- report assembly -------------------------------------------------------

struct Report {
  GapReport r;
  CheckConfig cfg;  // with per-trial solver seeds
  QuadratureRule rule;

  Report(const CheckSpec& spec, const CheckConfig& c, std::uint64_t trial) : cfg(c) {
    r.check = spec.id;
    r.trial = trial;
    r.strict = spec.soundness == Soundness::Strict;
    r.two_sided = spec.identity;
    r.tolerance = spec.identity ? c.tol_identity : r.strict ? c.tol_strict : c.tol_heur;
    const std::uint64_t s = derive_seed(derive_seed(c.seed, tag_of(spec.id)), trial);
    cfg.ent.seed = derive_seed(s, tag_of("ent"));
    cfg.ent.inner.seed = derive_seed(s, tag_of("ent.inner"));
    cfg.ent.cone.seed = derive_seed(s, tag_of("ent.cone"));
    cfg.meas.seed = derive_seed(s, tag_of("meas"));
    rule = beta0_rule(c.quad_n);
    r.budget["quad_n"] = c.quad_n;
    r.budget["restarts"] = c.ent.restarts;
    r.budget["meas_restarts"] = c.meas.restarts;
    r.budget["converged"] = Json::object();
  }
  ConeOptions cone() const {
    ConeOptions o = cfg.ent.cone;
    o.warm = nullptr;
    return o;
  }
  double q(const std::string& name, double value, Direction dir, bool incomplete = false) {
    r.quantities.push_back({name, value, dir, incomplete || !std::isfinite(value)});
    return value;
  }
  double q(const std::string& name, const EntMeasureValue& v) {
    r.budget["converged"][name] = v.converged;
    return q(name, v.value, v.direction);
  }
  double q(const std::string& name, const MeasuredValue& v) {
    r.budget["converged"][name] = v.converged;
    return q(name, v.value, v.direction, v.incomplete && !std::isfinite(v.value));
  }
  void main(double lhs, double rhs) {
    r.lhs = lhs;
    r.rhs = rhs;
    r.gap = lhs - rhs;
  }
  void layer(const std::string& name, double lhs, double rhs, double tol, bool strict, bool two_sided = false) {
    Layer l{name, lhs, rhs, lhs - rhs, tol, strict, two_sided, false};
    l.violated = std::isnan(l.gap) || (two_sided ? std::abs(l.gap) > tol : l.gap < -tol);
    r.layers.push_back(l);
  }
  void witness(const std::string& name, const LabeledOperator& op) {
    if (op.dim() <= 16) r.witnesses[name] = operator_to_json(op);
  }
  GapReport finish() {
    for (const auto& qq : r.quantities) r.incomplete = r.incomplete || qq.incomplete;
    if (std::isnan(r.gap)) r.incomplete = true;
    return r;
  }
};

// ---- input checks ----------------------------------------------------------

void require_layout_labels(const CheckSpec& spec, const LabeledOperator& x, const char* what) {
  LabelSet want = spec.layout.labels(), have = x.layout().labels();
  std::sort(want.begin(), want.end());
  std::sort(have.begin(), have.end());
  if (want != have) {
    std::string s;
    for (const auto& l : spec.layout.labels()) s += (s.empty() ? "" : ",") + l;
    throw LayoutError("check '" + spec.id + "': " + what + " labels must be {" + s + "}");
  }
}

const LabeledOperator& state_of(const CheckSpec& spec, const CheckInput& in) {
  if (!in.state) throw ContractViolation("check '" + spec.id + "': a state input is required");
  require_layout_labels(spec, *in.state, "state");
  require_state(*in.state);
  return *in.state;
}

LabeledOperator second_of(const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  if (!in.second) throw ContractViolation("check '" + spec.id + "': a second state (sigma) is required");
  require_layout_labels(spec, *in.second, "sigma");
  require_state(*in.second, "sigma");
  const LabeledOperator s = as(*in.second, rho);
  if (!(s.layout() == rho.layout())) throw LayoutError("check '" + spec.id + "': rho and sigma dimensions differ");
  return s;
}

int parse_arg(const std::string& id, int which) {
  static const std::regex re(R"(^[a-z_0-9]+\((\d+)(?:,(\d+))?\)$)");
  std::smatch m;
  if (!std::regex_match(id, m, re) || !m[which].matched) return 0;
  return std::stoi(m[which].str());
}

std::string base_id(const std::string& id) { return id.substr(0, id.find('(')); }

// ---- shared constructions -----------------------------------------------------

struct EPair {
  EntMeasureValue e;
  double all = 0.0;
};

// E and E_ALL across (first, rest); E_ALL is the smaller of its own descent and
// D_ALL at the E witness, so E_ALL ≤ E holds on the reported values.
EPair e_and_eall(Report& rep, const std::string& tag, const LabeledOperator& rho, const LabelSet& first) {
  EPair p;
  const LabelSet rest = rho.layout().complement(first);
  p.e = ree(rho, {first, rest}, rep.cfg.ent);
  const EntMeasureValue all = ree_measured(rho, first, MeasClass::All, rep.cfg.ent);
  p.all = std::min({all.value, d_all(rho, p.e.sigma).value, p.e.value});
  rep.q("E(" + tag + ")", p.e);
  rep.r.budget["converged"]["E_ALL(" + tag + ")"] = all.converged;
  rep.q("E_ALL(" + tag + ")", p.all, Direction::Heuristic);
  return p;
}

RecoveryPlan bar_plan(const LabeledOperator& rho, const std::vector<std::pair<Label, Label>>& pairs) {
  RecoveryPlan plan;
  for (const auto& [sys, bar] : pairs) plan.emplace_back(marginal(rho, {sys, bar}), LabelSet{bar});
  return plan;
}

std::vector<LabelSet> singletons(const LabelSet& l) {
  std::vector<LabelSet> out;
  for (const auto& x : l) out.push_back({x});
  return out;
}

struct ChainValue {
  double lhs = 0.0, rhs = 0.0;
  double x_value = 0.0;  // cone value of X on (ρ_X, γ_X)
  double y_value = 0.0;  // D_ALL lower value on (ρ_bar, γ̂)
  LabeledOperator gamma_hat;
};

// For σ on the barred systems, γ = ∫(⊗R_t)(σ), X in a cone on the unbarred
// systems and Y > 0 on the barred ones:
//   I + D(ρ_bar‖σ) ≥ tr ρ_X log X + tr ρ_bar log Y − log tr[(X⊗Y)γ].
ChainValue cemi_chain(Report& rep, const LabeledOperator& rho, double cemi_value, const RecoveryPlan& plan,
                      const LabeledOperator& sigma,
                      const std::function<MeasuredValue(const LabeledOperator&, const LabeledOperator&)>& make_x) {
  LabelSet added;
  for (const auto& f : plan) added.insert(added.end(), f.added().begin(), f.added().end());
  const SystemLayout xl = sub_layout(rho.layout(), added);
  const CemiGamma g0 = cemi_gamma(plan, sigma, identity(xl), rep.rule);
  const LabeledOperator rho_x = as(marginal(rho, added), g0.gamma_x);
  const MeasuredValue xv = make_x(rho_x, g0.gamma_x);
  if (!xv.cone) throw ContractViolation("cemi_chain: cone witness missing");
  const LabeledOperator x = reorder(LabeledOperator(xv.cone->layout, ridge(xv.cone->op)), g0.gamma_x.layout().labels());
  const CemiGamma g = cemi_gamma(plan, sigma, x, rep.rule);
  const LabeledOperator rho_bar = as(marginal(rho, sigma.layout().labels()), g.numerator);
  const MeasuredValue yv = d_all(rho_bar, g.gamma_hat);
  const Mat y = ridge(yv.omega);
  ChainValue out;
  out.lhs = cemi_value + umegaki(rho_bar, as(sigma, rho_bar)).value;
  out.rhs = tr_log(rho_x.mat(), x.mat()) + tr_log(rho_bar.mat(), y) - std::log((y * g.numerator.mat()).trace().real());
  out.x_value = xv.value;
  out.y_value = yv.value;
  out.gamma_hat = g.gamma_hat;
  rep.witness("X", x);
  rep.witness("gamma_hat", g.gamma_hat);
  return out;
}

MeasuredValue sepp_x(const Report& rep, const LabeledOperator& rx, const LabeledOperator& gx) {
  return cone_bound(rx, gx, MeasClass::SEPP, singletons(rx.layout().labels()), rep.cone());
}

// Bipartite: transpose on the second system; multipartite: on each system.
std::vector<LabelSet> ppt_sets(const LabelSet& labels) {
  if (labels.size() == 2) return {{labels[1]}};
  return singletons(labels);
}

MeasuredValue ppt_x(const Report& rep, const LabeledOperator& rx, const LabeledOperator& gx) {
  return cone_bound_ppt(rx, gx, ppt_sets(rx.layout().labels()), rep.cone());
}

// ---- checks -------------------------------------------------------------------

void check_ssa(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  rep.main(rep.q("I(A:B|C)", cqmi(rho, {"A"}, {"B"}, {"C"}), Direction::Exact), 0.0);
}

void check_exp_state(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  const double i = rep.q("I(A:B|C)", cqmi(rho, {"A"}, {"B"}, {"C"}), Direction::Exact);
  const ExpStateForm f = exp_state_form(rho, {"A"}, {"B"}, {"C"});
  rep.main(i, rep.q("D(rho||exp_state)", f.divergence, Direction::Exact));
  rep.q("tr exp_state", f.op.trace().real(), Direction::Exact);
}

void check_classical(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  if (!in.pmf) throw ContractViolation("check '" + spec.id + "': a pmf input is required");
  const ClassicalIdentities c = classical_identities(*in.pmf);
  rep.q("I(X:Y|Z)", c.cmi, Direction::Exact);
  rep.q("D(P||P_Y|Z P_XZ)", c.recovery, Direction::Exact);
  rep.q("D(P||P_Z P_X|Z P_Y|Z)", c.markov, Direction::Exact);
  rep.main(c.cmi, c.recovery);
  rep.layer("markov_form", c.cmi, c.markov, rep.cfg.tol_identity, true, true);
}

void check_markov_zero(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  const double i = rep.q("I(A:B|C)", cqmi(rho, {"A"}, {"B"}, {"C"}), Direction::Exact);
  rep.main(i, 0.0);
  const RecoveryPlan plan{PetzFamily(marginal(rho, {"C", "B"}), {"C"})};
  const LabeledOperator rec = as(averaged_recover(plan, rep.rule, marginal(rho, {"A", "C"})), rho);
  const double dist = 0.5 * trace_norm(Mat(rec.mat() - rho.mat()));
  rep.q("T(rho, int R_t(rho_AC))", dist, Direction::Exact);
  rep.layer("recovery", 0.0, dist, 1e-8, true, true);
}

double gt_integral(const std::vector<Eigensystem>& es, double p, const QuadratureRule& rule) {
  const Eigen::Index d = es.front().dim();
  std::vector<double> terms(rule.count());
  for (int i = 0; i < rule.count(); ++i) {
    const Complex z(1.0, rule.nodes[i]);
    Mat prod = Mat::Identity(d, d);
    for (const auto& e : es) prod = prod * apply_spectral(e, [z](double v) { return std::exp(z * v); });
    terms[i] = rule.weights[i] * std::log(schatten_norm(prod, p));
  }
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

void check_gt_multi(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const int n = parse_arg(spec.id, 1), p = parse_arg(spec.id, 2);
  if (static_cast<int>(in.hermitians.size()) != n)
    throw ContractViolation("check '" + spec.id + "': expects " + std::to_string(n) + " Hermitian matrices");
  std::vector<Eigensystem> es;
  const Eigen::Index d = in.hermitians.front().rows();
  Mat sum = Mat::Zero(d, d);
  for (const Mat& h : in.hermitians) {
    if (h.rows() != d || !is_hermitian(h, 1e-10))
      throw ContractViolation("check '" + spec.id + "': inputs must be Hermitian of equal size");
    es.push_back(eigh(hermitian_part(h)));
    sum += hermitian_part(h);
  }
  const double rhs = std::log(schatten_norm(exp_hermitian(sum), p));
  const double lhs = gt_integral(es, p, rep.rule);
  const double fine = gt_integral(es, p, beta0_rule(2 * rep.cfg.quad_n - 1));
  rep.q("int dbeta0 log||prod exp((1+it)H_k)||_p", lhs, Direction::Exact);
  rep.q("log||exp(sum H_k)||_p", rhs, Direction::Exact);
  rep.q("same integral, 2N-1 nodes", fine, Direction::Exact);
  rep.main(lhs, rhs);
  rep.layer("quadrature_refinement", lhs, fine, rep.cfg.tol_identity, true, true);
}

void check_pb(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  if (in.hermitians.size() != 2) throw ContractViolation("check '" + spec.id + "': expects two Hermitian matrices");
  for (const Mat& h : in.hermitians)
    if (!is_hermitian(h, 1e-10)) throw ContractViolation("check '" + spec.id + "': inputs must be Hermitian");
  const Mat g2 = hermitian_part(in.hermitians[1]);
  Mat g1 = hermitian_part(in.hermitians[0]);
  if (g1.rows() != g2.rows()) throw ContractViolation("check '" + spec.id + "': size mismatch");
  // Shift G1 so that tr exp G1 = 1.
  g1 -= std::log(exp_hermitian(g1).trace().real()) * Mat::Identity(g1.rows(), g1.cols());
  const Mat e1 = exp_hermitian(g1);
  rep.q("tr exp(G1)", e1.trace().real(), Direction::Exact);
  const double lhs = rep.q("-tr[G2 exp G1]", -(g2 * e1).trace().real(), Direction::Exact);
  const double rhs = rep.q("-log tr exp(G1+G2)", -std::log(exp_hermitian(Mat(g1 + g2)).trace().real()), Direction::Exact);
  rep.main(lhs, rhs);
}

void check_achiev_sandwich(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const int n = parse_arg(spec.id, 1);
  const LabeledOperator sigma = second_of(spec, in);
  const LabeledOperator rn = tensor_power(*in.state, n), sn = tensor_power(sigma, n);
  const double d = rep.q("D(rho^n||sigma^n)", umegaki(rn, sn).value, Direction::Exact);
  const MeasuredValue pin = d_pinch(rn, sn);
  rep.q("D_pinch", pin);
  rep.q("|spec(sigma^n)|", pin.spec_count, Direction::Exact);
  rep.main(pin.value, d - std::log(static_cast<double>(pin.spec_count)));
  const MeasuredValue all = d_all(rn, sn);
  rep.q("D_ALL", all);
  rep.layer("D >= D_ALL", d, all.value, rep.cfg.tol_strict, true);
  rep.layer("D >= D_pinch", d, pin.value, rep.cfg.tol_strict, true);
}

void check_cqmi_recovery_fid(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  const double i = rep.q("I(A:B|C)", cqmi(rho, {"A"}, {"B"}, {"C"}), Direction::Exact);
  const RecoveryPlan plan{PetzFamily(marginal(rho, {"B", "C"}), {"C"})};
  const double f = fidelity_bound(rep.rule, node_fidelities(plan, rep.rule, marginal(rho, {"A", "C"}), rho));
  rep.main(i, rep.q("-int log F(rho, R_t(rho_AC))", f, Direction::Exact));
}

void check_cemi_recover(Report& rep, const CheckSpec& spec, const CheckInput& in, bool measured) {
  const LabeledOperator& rho = state_of(spec, in);
  const double i = rep.q("I(A|Ab:B|Bb)", cemi_term(rho, {"A"}, {"Ab"}, {"B"}, {"Bb"}), Direction::Exact);
  const RecoveryPlan plan = bar_plan(rho, {{"A", "Ab"}, {"B", "Bb"}});
  const LabeledOperator bar = marginal(rho, {"Ab", "Bb"});
  if (measured) {
    const LabeledOperator rec = as(herm(averaged_recover(plan, rep.rule, bar)), rho);
    rep.main(i, rep.q("D_ALL(rho||int (R x R)(rho_bar))", d_all(rho, rec)));
  } else {
    const double f = fidelity_bound(rep.rule, node_fidelities(plan, rep.rule, bar, rho));
    rep.main(i, rep.q("-int log F(rho, (R x R)(rho_bar))", f, Direction::Exact));
  }
}

void check_cemi_multi_recover(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  const double i = rep.q("I(A|Ab:B|Bb:C|Cb)",
                         cemi_term3(rho, {"A"}, {"Ab"}, {"B"}, {"Bb"}, {"C"}, {"Cb"}), Direction::Exact);
  const RecoveryPlan plan = bar_plan(rho, {{"A", "Ab"}, {"B", "Bb"}, {"C", "Cb"}});
  const double f = fidelity_bound(rep.rule, node_fidelities(plan, rep.rule, marginal(rho, {"Ab", "Bb", "Cb"}), rho));
  rep.main(i, rep.q("-int log F(rho, (R x R x R)(rho_bar))", f, Direction::Exact));
}

void check_squashed_multi_recover(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  const double i = rep.q("I(A1:A2|C) + I(A1A2:A3|C)", tripartite_cqmi(rho, {"A1"}, {"A2"}, {"A3"}, {"C"}),
                         Direction::Exact);
  const RecoveryPlan plan{PetzFamily(marginal(rho, {"A2", "C"}), {"C"}), PetzFamily(marginal(rho, {"A3", "C"}), {"C"})};
  const LabeledOperator in1 = marginal(rho, {"A1", "C"});
  const double f = fidelity_bound(rep.rule, node_fidelities(plan, rep.rule, in1, rho));
  rep.main(i, rep.q("-int log F(rho, R_3 o R_2 (rho_A1C))", f, Direction::Exact));
  const LabeledOperator rec = as(herm(averaged_recover(plan, rep.rule, in1)), rho);
  const MeasuredValue m = d_all(rho, rec);
  rep.layer("measured_form", i, rep.q("D_ALL(rho||int R_3 o R_2 (rho_A1C))", m), rep.cfg.tol_heur, false);
}

// Best-found E_LOCC1(B→A): descent value, also scored at a second separable σ.
double e_locc1(Report& rep, const LabeledOperator& rho_ab, const LabeledOperator& sigma_ab) {
  const EntMeasureValue v = ree_measured(rho_ab, {"B"}, MeasClass::LOCC1, rep.cfg.ent);
  rep.r.budget["converged"]["E_LOCC1(B->A)"] = v.converged;
  const double at = d_locc1(rho_ab, as(sigma_ab, rho_ab), {"B"}, rep.cfg.meas).value;
  return rep.q("E_LOCC1(B->A)", std::min(v.value, at), Direction::Heuristic);
}

void check_sq_main(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  const double i = rep.q("I(A:B|C)", cqmi(rho, {"A"}, {"B"}, {"C"}), Direction::Exact);
  const LabeledOperator rho_ac = marginal(rho, {"A", "C"}), rho_ab = marginal(rho, {"A", "B"});
  const EPair ac = e_and_eall(rep, "A:C", rho_ac, {"A"});
  const LabeledOperator sigma_w = ac.e.sigma;

  // Witness: γ^t = R_t(σ) with R_t: C → B'C anchored at ρ_{B'C}, B' ≅ B ⊗ B.
  const LabeledOperator rho_bpc = widen(marginal(rho, {"B", "C"}), "B", "Bp");
  const LabeledOperator rho_abp = widen(rho_ab, "B", "Bp");
  const SystemLayout xl = sub_layout(rho_abp.layout(), {"A", "Bp"});
  const SqGamma g0 = gamma_construction(rho_bpc, {"C"}, *ac.e.sigma_sep, identity_cq(xl, "Bp"), rep.rule);
  const LabeledOperator gamma_ab = as(narrow(g0.gamma_x, "Bp", "B"), rho_ab);
  const MeasuredValue xm = d_locc1(rho_ab, gamma_ab, {"B"}, rep.cfg.meas);
  const double e1 = e_locc1(rep, rho_ab, gamma_ab);
  rep.main(i, e1 - (ac.e.value - ac.all));

  const CqOperator x = cq_from_locc1(xm.witness, rho_ab, gamma_ab, "Bp");
  const SqGamma g = gamma_construction(rho_bpc, {"C"}, *ac.e.sigma_sep, x, rep.rule);
  const LabeledOperator num = as(g.numerator, rho_ac);
  const MeasuredValue yv = d_all(rho_ac, as(g.gamma_hat, rho_ac));
  const Mat y = ridge(yv.omega);
  const double lhs = i + umegaki(rho_ac, sigma_w).value;
  const double rhs = tr_log(as(rho_abp, LabeledOperator(x.layout, x.assemble())).mat(), x.assemble()) +
                     tr_log(rho_ac.mat(), y) - std::log((y * num.mat()).trace().real());
  rep.layer("witness_chain", lhs, rhs, rep.cfg.tol_chain, true);
  rep.q("D_LOCC1(rho_AB||gamma_AB)", xm);
  rep.witness("sigma_AC", sigma_w);
  rep.witness("gamma_hat", g.gamma_hat);
}

void check_sq_chain(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  const EntMeasureValue w = ree_measured(rho, {"B"}, MeasClass::LOCC1, rep.cfg.ent);
  rep.q("E_LOCC1(B->A)", w);
  const LabeledOperator& s = w.sigma;
  const FidNorm m = restricted_fid_norm(rho, s, MeasClass::LOCC1, {"B"}, rep.cfg.meas);
  const double d = rep.q("D_LOCC1(rho||s*)", m.divergence, Direction::Heuristic);
  const double f = rep.q("-log F_LOCC1(rho,s*)", -std::log(m.fidelity), Direction::Heuristic);
  const double nn = rep.q("1/4 ||rho-s*||^2_LOCC1", 0.25 * m.norm * m.norm, Direction::Heuristic);
  rep.main(d, f);
  rep.layer("fidelity >= norm (LOCC1)", f, nn, rep.cfg.tol_heur, false);
  const FidNorm a = restricted_fid_norm(rho, s, MeasClass::All, {}, rep.cfg.meas);
  const double fa = rep.q("-log F(rho,s*)", -std::log(a.fidelity), Direction::Exact);
  const double na = rep.q("1/4 ||rho-s*||_1^2", 0.25 * a.norm * a.norm, Direction::Exact);
  const double du = rep.q("D(rho||s*)", umegaki(rho, s).value, Direction::Exact);
  rep.layer("fidelity >= norm (ALL)", fa, na, rep.cfg.tol_strict, true);
  rep.layer("D >= -log F", du, fa, rep.cfg.tol_strict, true);
  rep.layer("D_ALL >= -log F (ALL)", a.divergence, fa, rep.cfg.tol_heur, false);
  rep.witness("sigma", s);
}

void check_state_redistribution(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  const double i = rep.q("I(A:B|C)", cqmi(rho, {"A"}, {"B"}, {"C"}), Direction::Exact);
  const LabeledOperator rho_ac = marginal(rho, {"A", "C"});
  const EntMeasureValue e = ree(rho_ac, {{"A"}, {"C"}}, rep.cfg.ent);
  rep.q("E(A:C)", e);
  const RecoveryPlan plan{PetzFamily(marginal(rho, {"B", "C"}), {"C"})};
  const LabeledOperator gamma = as(herm(averaged_recover(plan, rep.rule, e.sigma)), rho);
  const MeasuredValue at = d_all(rho, gamma);
  const EntMeasureValue all = ree_measured(rho, {"A"}, MeasClass::All, rep.cfg.ent);
  rep.r.budget["converged"]["E_ALL(A:BC)"] = all.converged;
  const double eall = rep.q("E_ALL(A:BC)", std::min(all.value, at.value), Direction::Heuristic);
  rep.main(i, eall - e.value);
  rep.q("D_ALL(rho||int R_t(sigma_AC))", at);
  rep.layer("witness_chain", i + umegaki(rho_ac, e.sigma).value, at.value, rep.cfg.tol_chain, true);
  rep.witness("sigma_AC", e.sigma);
}

void check_post_li_winter(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  const EntMeasureValue e = ree(rho, {{"A"}, {"B", "C"}}, rep.cfg.ent);
  const double lhs = rep.q("E(A:BC)", e);
  const LabeledOperator rho_ab = marginal(rho, {"A", "B"}), rho_ac = marginal(rho, {"A", "C"});
  const LabeledOperator sigma_ab = marginal(e.sigma, {"A", "B"});
  const double e1 = e_locc1(rep, rho_ab, sigma_ab);
  const EPair ac = e_and_eall(rep, "A:C", rho_ac, {"A"});
  rep.main(lhs, e1 + ac.all);

  // Witness: D(ρ‖σ) ≥ tr ρ_AB' log X + tr ρ_AC log Y − log ∫ tr[σ X^z Y X^z̄].
  const MeasuredValue xm = d_locc1(rho_ab, as(sigma_ab, rho_ab), {"B"}, rep.cfg.meas);
  const CqOperator x = cq_from_locc1(xm.witness, rho_ab, as(sigma_ab, rho_ab), "Bp");
  const LabeledOperator sw = widen(e.sigma, "B", "Bp");
  const SystemLayout full({"A", "Bp", "C"}, {x.layout.dim_of("A"), x.layout.dim_of("Bp"), rho.layout().dim_of("C")});
  const Mat s = reorder(sw, full.labels()).mat();
  const int n = rep.rule.count();
  std::vector<Mat> parts(n);
  parallel_for(n, [&](int k) {
    const Mat xz = embed_mat(LabeledOperator(x.layout, x.power(Complex(0.5, 0.5 * rep.rule.nodes[k]))), full);
    parts[k] = rep.rule.weights[k] * (xz * s * xz.adjoint());
  });
  Mat acc = Mat::Zero(s.rows(), s.cols());
  for (const Mat& p : parts) acc += p;
  const LabeledOperator num = as(herm(partial_trace(LabeledOperator(full, acc), {"Bp"})), rho_ac);
  const double norm = num.trace().real();
  const MeasuredValue yv = d_all(rho_ac, LabeledOperator(num.layout(), num.mat() / norm));
  const Mat y = ridge(yv.omega);
  const LabeledOperator xo(x.layout, x.assemble());
  const double rhs = tr_log(as(widen(rho_ab, "B", "Bp"), xo).mat(), xo.mat()) + tr_log(rho_ac.mat(), y) -
                     std::log((y * num.mat()).trace().real());
  rep.layer("witness_chain", lhs, rhs, rep.cfg.tol_chain, true);
  rep.witness("sigma", e.sigma);
}

struct BarEnt {
  EntMeasureValue e;   // E or P on the barred systems
  double all = 0.0;    // E_ALL or P_ALL estimate
};

void check_cemi_main(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  const double i = rep.q("I(A|Ab:B|Bb)", cemi_term(rho, {"A"}, {"Ab"}, {"B"}, {"Bb"}), Direction::Exact);
  const EntMeasureValue es = ree_measured(marginal(rho, {"A", "B"}), {"A"}, MeasClass::SEPP, rep.cfg.ent);
  const double esepp = rep.q("E_SEPP(A:B)", es);
  const EPair bar = e_and_eall(rep, "Ab:Bb", marginal(rho, {"Ab", "Bb"}), {"Ab"});
  rep.main(i, esepp - (bar.e.value - bar.all));
  const RecoveryPlan plan = bar_plan(rho, {{"A", "Ab"}, {"B", "Bb"}});
  const ChainValue c = cemi_chain(rep, rho, i, plan, bar.e.sigma,
                                  [&](const LabeledOperator& rx, const LabeledOperator& gx) { return sepp_x(rep, rx, gx); });
  rep.layer("witness_chain", c.lhs, c.rhs, rep.cfg.tol_chain, true);
  rep.witness("sigma_bar", bar.e.sigma);
}

void check_cemi_ppt(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  const double i = rep.q("I(A|Ab:B|Bb)", cemi_term(rho, {"A"}, {"Ab"}, {"B"}, {"Bb"}), Direction::Exact);
  const EntMeasureValue pp = ppt_ree_measured(marginal(rho, {"A", "B"}), {{"B"}}, rep.cfg.ent);
  const double pppt = rep.q("P_PPT(A:B)", pp);
  const LabeledOperator rho_bar = marginal(rho, {"Ab", "Bb"});
  const EntMeasureValue p = ppt_ree(rho_bar, {{"Bb"}}, rep.cfg.ent);
  rep.q("P(Ab:Bb)", p);
  // Separable states are PPT, so E_ALL upper-estimates P_ALL as well.
  const EntMeasureValue eall = ree_measured(rho_bar, {"Ab"}, MeasClass::All, rep.cfg.ent);
  rep.r.budget["converged"]["P_ALL(Ab:Bb)"] = eall.converged;
  const double pall =
      rep.q("P_ALL(Ab:Bb)", std::min({eall.value, d_all(rho_bar, p.sigma).value, p.value}), Direction::Heuristic);
  rep.main(i, pppt - (p.value - pall));
  const RecoveryPlan plan = bar_plan(rho, {{"A", "Ab"}, {"B", "Bb"}});
  const ChainValue c = cemi_chain(rep, rho, i, plan, p.sigma,
                                  [&](const LabeledOperator& rx, const LabeledOperator& gx) { return ppt_x(rep, rx, gx); });
  rep.layer("witness_chain", c.lhs, c.rhs, rep.cfg.tol_chain, true);
  double dev = 0.0;
  for (double t : {0.0, 0.7, -1.9})
    for (const auto& f : plan)
      dev = std::max(dev, transpose_twirl_identity(marginal(rho, f.anchor_layout().labels()), f.source(), t));
  rep.layer("transpose_identity", 0.0, dev, rep.cfg.tol_identity, true, true);
  const double mn = min_eigenvalue(hermitian_part(partial_transpose(c.gamma_hat, {"Bb"}).mat()));
  rep.layer("gamma_hat_ppt", mn, 0.0, rep.cfg.tol_strict, true);
  rep.witness("sigma_bar", p.sigma);
}

void check_piani_cemi(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  const double i = rep.q("I(A|Ab:B|Bb)", cemi_term(rho, {"A"}, {"Ab"}, {"B"}, {"Bb"}), Direction::Exact);
  const LabeledOperator rho_bar = marginal(rho, {"Ab", "Bb"});
  const EntMeasureValue e = ree(rho_bar, {{"Ab"}, {"Bb"}}, rep.cfg.ent);
  rep.q("E(Ab:Bb)", e);
  const RecoveryPlan plan = bar_plan(rho, {{"A", "Ab"}, {"B", "Bb"}});
  const LabeledOperator gamma = as(herm(averaged_recover(plan, rep.rule, e.sigma)), rho);
  // γ is separable across AAb:BBb (local maps on a separable σ), so D_ALL at γ
  // is a best-found value of E_ALL.
  const MeasuredValue at = d_all(rho, gamma);
  rep.r.budget["converged"]["E_ALL(AAb:BBb)"] = at.converged;
  const double eall = rep.q("E_ALL(AAb:BBb)", at.value, Direction::Heuristic);
  rep.main(i, eall - e.value);
  rep.layer("witness_chain", i + umegaki(rho_bar, e.sigma).value, at.value, rep.cfg.tol_chain, true);
  rep.witness("sigma_bar", e.sigma);
}

void check_piani_superadd(Report& rep, const CheckSpec& spec, const CheckInput& in, bool ppt) {
  const LabeledOperator& rho = state_of(spec, in);
  const LabeledOperator rho_ab = marginal(rho, {"A", "B"}), rho_bar = marginal(rho, {"Ab", "Bb"});
  if (ppt) {
    const double lhs = rep.q("P(AAb:BBb)", ppt_ree(rho, {{"B", "Bb"}}, rep.cfg.ent));
    const double a = rep.q("P_PPT(A:B)", ppt_ree_measured(rho_ab, {{"B"}}, rep.cfg.ent));
    const double b = rep.q("P(Ab:Bb)", ppt_ree(rho_bar, {{"Bb"}}, rep.cfg.ent));
    rep.main(lhs, a + b);
  } else {
    const double lhs = rep.q("E(AAb:BBb)", ree(rho, {{"A", "Ab"}, {"B", "Bb"}}, rep.cfg.ent));
    const double a = rep.q("E_SEPP(A:B)", ree_measured(rho_ab, {"A"}, MeasClass::SEPP, rep.cfg.ent));
    const double b = rep.q("E(Ab:Bb)", ree(rho_bar, {{"Ab"}, {"Bb"}}, rep.cfg.ent));
    rep.main(lhs, a + b);
  }
}

void check_cemi_multi_faithful(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator& rho = state_of(spec, in);
  const double i = rep.q("I(A|Ab:B|Bb:C|Cb)",
                         cemi_term3(rho, {"A"}, {"Ab"}, {"B"}, {"Bb"}, {"C"}, {"Cb"}), Direction::Exact);
  const LabeledOperator rho_x = marginal(rho, {"A", "B", "C"}), rho_bar = marginal(rho, {"Ab", "Bb", "Cb"});
  const EntMeasureValue es = ree3(rho_x, {"A"}, {"B"}, {"C"}, Ree3Class::SeppCone, rep.cfg.ent);
  const EntMeasureValue e = ree3(rho_bar, {"Ab"}, {"Bb"}, {"Cb"}, Ree3Class::Exact, rep.cfg.ent);
  const EntMeasureValue ea = ree3(rho_bar, {"Ab"}, {"Bb"}, {"Cb"}, Ree3Class::All, rep.cfg.ent);
  const double esepp = rep.q("E_SEPP(A:B:C)", es);
  rep.q("E(Ab:Bb:Cb)", e);
  rep.r.budget["converged"]["E_ALL(Ab:Bb:Cb)"] = ea.converged;
  const double eall =
      rep.q("E_ALL(Ab:Bb:Cb)", std::min({ea.value, d_all(rho_bar, e.sigma).value, e.value}), Direction::Heuristic);
  rep.main(i, esepp - (e.value - eall));
  const RecoveryPlan plan = bar_plan(rho, {{"A", "Ab"}, {"B", "Bb"}, {"C", "Cb"}});
  const ChainValue c = cemi_chain(rep, rho, i, plan, e.sigma,
                                  [&](const LabeledOperator& rx, const LabeledOperator& gx) { return sepp_x(rep, rx, gx); });
  rep.layer("witness_chain", c.lhs, c.rhs, rep.cfg.tol_chain, true);

  // PPT analogue.
  const std::vector<LabelSet> tb{{"Ab"}, {"Bb"}, {"Cb"}};
  const EntMeasureValue pp = ree3(rho_x, {"A"}, {"B"}, {"C"}, Ree3Class::PptCone, rep.cfg.ent);
  const EntMeasureValue p = ppt_ree(rho_bar, tb, rep.cfg.ent, &e.sigma);
  const double pppt = rep.q("P_PPT(A:B:C)", pp);
  rep.q("P(Ab:Bb:Cb)", p);
  const double pall = rep.q("P_ALL(Ab:Bb:Cb)", std::min({eall, d_all(rho_bar, p.sigma).value, p.value}),
                            Direction::Heuristic);
  rep.layer("ppt_form", i, pppt - (p.value - pall), rep.cfg.tol_heur, false);
}

void check_locc1_dpi(Report& rep, const CheckSpec& spec, const CheckInput& in) {
  const LabeledOperator sigma = second_of(spec, in);
  const LabeledOperator& rho = *in.state;
  const LabeledOperator r2 = reorder(rho, {"A", "B"}), s2 = reorder(sigma, {"A", "B"});
  Rng rng(rep.cfg.meas.seed, tag_of("channel"));
  const OneWayChannel g = one_way_locc_channel(r2.layout(), 3, 2, rng);
  const LabeledOperator gr(r2.layout(), hermitian_part(g.apply(r2.mat())));
  const LabeledOperator gs(r2.layout(), hermitian_part(g.apply(s2.mat())));
  const MeasuredValue out = d_locc1(gr, gs, {"A"}, rep.cfg.meas);
  const double rhs = rep.q("D_LOCC1(G rho||G sigma)", out);
  const Measurement pb = pullback_locc1(out.witness, g);
  const double pulled = evaluate(pb, r2.mat(), s2.mat());
  const MeasuredValue inp = d_locc1(r2, s2, {"A"}, rep.cfg.meas);
  rep.q("D_LOCC1(rho||sigma) solver", inp);
  rep.q("D_LOCC1(rho||sigma) pulled back", pulled, Direction::Lower);
  rep.main(std::max(inp.value, pulled), rhs);
  rep.layer("pullback_identity", pulled, evaluate(out.witness, gr.mat(), gs.mat()), rep.cfg.tol_identity, true, true);
}

using CheckFn = std::function<void(Report&, const CheckSpec&, const CheckInput&)>;

const std::map<std::string, CheckFn>& dispatch() {
  static const std::map<std::string, CheckFn> table = {
      {"ssa", check_ssa},
      {"exp_state", check_exp_state},
      {"classical", check_classical},
      {"markov_zero", check_markov_zero},
      {"gt_multi", check_gt_multi},
      {"pb", check_pb},
      {"achiev_sandwich", check_achiev_sandwich},
      {"cqmi_recovery_fid", check_cqmi_recovery_fid},
      {"sq_main", check_sq_main},
      {"sq_chain", check_sq_chain},
      {"state_redistribution", check_state_redistribution},
      {"post_li_winter", check_post_li_winter},
      {"cemi_recover_meas", [](Report& r, const CheckSpec& s, const CheckInput& i) { check_cemi_recover(r, s, i, true); }},
      {"cemi_recover_fid", [](Report& r, const CheckSpec& s, const CheckInput& i) { check_cemi_recover(r, s, i, false); }},
      {"cemi_main", check_cemi_main},
      {"cemi_ppt", check_cemi_ppt},
      {"piani_cemi", check_piani_cemi},
      {"piani_superadd_sepp", [](Report& r, const CheckSpec& s, const CheckInput& i) { check_piani_superadd(r, s, i, false); }},
      {"piani_superadd_ppt", [](Report& r, const CheckSpec& s, const CheckInput& i) { check_piani_superadd(r, s, i, true); }},
      {"cemi_multi_recover", check_cemi_multi_recover},
      {"cemi_multi_faithful", check_cemi_multi_faithful},
      {"squashed_multi_recover", check_squashed_multi_recover},
      {"locc1_dpi", check_locc1_dpi},
  };
  return table;
}

// ---- sampling -------------------------------------------------------------------

SystemLayout sampling_layout(const CheckSpec& spec, const CheckConfig& cfg) {
  std::vector<int> dims = spec.layout.dims();
  for (const auto& [label, d] : cfg.dims) {
    if (!spec.layout.has(label))
      throw ParameterError("check '" + spec.id + "': unknown dimension key '" + label + "'");
    if (d < 1 || d > 8) throw ParameterError("check '" + spec.id + "': dimension of '" + label + "' must be in 1..8");
    dims[spec.layout.index_of(label)] = d;
  }
  return {spec.layout.labels(), dims};
}

LabeledOperator sample_state(const CheckSpec& spec, const CheckConfig& cfg, const SystemLayout& layout, Rng& rng) {
  const std::string& s = cfg.sampler;
  if (s == "ginibre") return ginibre_state(layout, rng).op();
  if (s == "pure") return haar_pure(layout, rng).op();
  if (s == "separable")
    return separable_mixture(layout, singletons(layout.labels()), 2 * layout.total_dim(), rng).assemble();
  if (s == "ppt") return ppt_state(layout, {layout.labels().back()}, rng).op();
  throw ParameterError("check '" + spec.id + "': unknown sampler '" + s + "'");
}

Mat random_state_mat(int d, Rng& rng) {
  return ginibre_state(SystemLayout({"X"}, {d}), rng).mat();
}

}  // namespace

const std::vector<CheckSpec>& list_checks() {
  static const std::vector<CheckSpec> registry = build_registry();
  return registry;
}

const CheckSpec& find_check(const std::string& id) {
  for (const auto& c : list_checks())
    if (c.id == id) return c;
  throw ParameterError("unknown check '" + id + "'");
}

CheckInput sample_input(const std::string& id, const CheckConfig& cfg, std::uint64_t trial) {
  const CheckSpec& spec = find_check(id);
  const SystemLayout layout = sampling_layout(spec, cfg);
  Rng rng(derive_seed(cfg.seed, tag_of(id)), trial);
  CheckInput in;
  const std::string base = base_id(id);
  if (spec.input == InputKind::Hermitians) {
    const int n = base == "pb" ? 2 : parse_arg(id, 1);
    for (int k = 0; k < n; ++k) in.hermitians.push_back(random_hermitian(layout.dim_of("H"), 1.0, rng));
  } else if (spec.input == InputKind::Pmf) {
    Pmf3 p;
    p.nx = layout.dim_of("X");
    p.ny = layout.dim_of("Y");
    p.nz = layout.dim_of("Z");
    double total = 0.0;
    for (int k = 0; k < p.nx * p.ny * p.nz; ++k) {
      p.p.push_back(0.05 + rng.uniform());
      total += p.p.back();
    }
    for (double& v : p.p) v /= total;
    in.pmf = p;
  } else if (base == "markov_zero") {
    const int da = layout.dim_of("A"), db = layout.dim_of("B");
    std::vector<MarkovBlock> blocks;
    double total = 0.0;
    for (auto [dl, dr] : {std::pair{1, 2}, std::pair{2, 1}}) {
      MarkovBlock b;
      b.weight = 0.2 + rng.uniform();
      total += b.weight;
      b.dim_left = dl;
      b.dim_right = dr;
      b.left = random_state_mat(da * dl, rng);
      b.right = random_state_mat(dr * db, rng);
      blocks.push_back(b);
    }
    for (auto& b : blocks) b.weight /= total;
    in.state = markov_state(blocks, "A", da, "C", "B", db).op();
  } else {
    in.state = sample_state(spec, cfg, layout, rng);
    if (base == "achiev_sandwich" || base == "locc1_dpi") in.second = ginibre_state(layout, rng).op();
  }
  return in;
}

// ---- reports --------------------------------------------------------------------

namespace {
bool beyond(double gap, double tol, bool two_sided) {
  return std::isnan(gap) || (two_sided ? std::abs(gap) > tol : gap < -tol);
}
}  // namespace

bool GapReport::main_violated() const { return beyond(gap, tolerance, two_sided); }

bool GapReport::strict_violation() const {
  if (strict && !incomplete && main_violated()) return true;
  for (const auto& l : layers)
    if (l.strict && l.violated) return true;
  return false;
}

bool GapReport::heuristic_slack() const {
  if (!strict && main_violated()) return true;
  for (const auto& l : layers)
    if (!l.strict && l.violated) return true;
  return false;
}

std::string GapReport::verdict() const {
  if (strict_violation()) return "strict_violation";
  if (incomplete) return "incomplete";
  if (heuristic_slack()) return "heuristic_slack";
  return "pass";
}

Json to_json(const GapReport& r) {
  Json j;
  j["check"] = r.check;
  j["trial"] = r.trial;
  j["verdict"] = r.verdict();
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["gap"] = r.gap;
  j["tolerance"] = r.tolerance;
  j["strict"] = r.strict;
  j["two_sided"] = r.two_sided;
  j["incomplete"] = r.incomplete;
  Json qs = Json::array();
  for (const auto& q : r.quantities)
    qs.push_back({{"name", q.name}, {"value", q.value}, {"direction", to_string(q.direction)}, {"incomplete", q.incomplete}});
  j["quantities"] = qs;
  Json dirs = Json::object();
  for (const auto& q : r.quantities) dirs[q.name] = to_string(q.direction);
  j["directions"] = dirs;
  Json ls = Json::array();
  for (const auto& l : r.layers)
    ls.push_back({{"name", l.name}, {"lhs", l.lhs}, {"rhs", l.rhs}, {"gap", l.gap}, {"tolerance", l.tolerance},
                  {"soundness", l.strict ? "strict" : "heuristic"}, {"two_sided", l.two_sided},
                  {"violated", l.violated}});
  j["layers"] = ls;
  j["witnesses"] = r.witnesses;
  j["budget"] = r.budget;
  return j;
}

GapReport run_check(const std::string& id, const CheckInput& input, const CheckConfig& cfg, std::uint64_t trial) {
  const CheckSpec& spec = find_check(id);
  if (cfg.quad_n < 3 || cfg.quad_n % 2 == 0) throw ParameterError("quad_n must be odd and at least 3");
  Report rep(spec, cfg, trial);
  dispatch().at(base_id(id))(rep, spec, input);
  return rep.finish();
}

GapReport run_trial(const std::string& id, const CheckConfig& cfg, std::uint64_t trial) {
  return run_check(id, sample_input(id, cfg, trial), cfg, trial);
}

SweepSummary summarize(const std::string& id, const std::vector<GapReport>& reports) {
  SweepSummary s;
  s.check = id;
  s.trials = static_cast<int>(reports.size());
  std::vector<double> gaps;
  for (const auto& r : reports) {
    // Two-sided checks are summarized by −|gap| so that min/p05 stay meaningful.
    gaps.push_back(r.two_sided ? -std::abs(r.gap) : r.gap);
    bool any = r.main_violated();
    for (const auto& l : r.layers) any = any || l.violated;
    s.violations += any;
    s.strict_violations += r.strict_violation();
    s.incomplete += r.incomplete;
  }
  if (gaps.empty()) return s;
  std::sort(gaps.begin(), gaps.end(), [](double a, double b) {
    if (std::isnan(a)) return !std::isnan(b);
    return !std::isnan(b) && a < b;
  });
  s.min_gap = gaps.front();
  s.p05_gap = gaps[static_cast<std::size_t>(std::floor(0.05 * static_cast<double>(gaps.size() - 1)))];
  return s;
}

SweepResult run_sweep(const std::string& id, const CheckConfig& cfg, int trials, int parallelism) {
  find_check(id);
  if (trials < 1) throw ParameterError("trials must be positive");
  SweepResult out;
  out.reports.resize(trials);
  parallel_for(
      trials, [&](int t) { out.reports[t] = run_trial(id, cfg, static_cast<std::uint64_t>(t)); }, parallelism);
  out.summary = summarize(id, out.reports);
  return out;
}

Json to_json(const SweepSummary& s) {
  return {{"check", s.check},         {"trials", s.trials},
          {"min_gap", s.min_gap},     {"p05_gap", s.p05_gap},
          {"violations", s.violations}, {"strict_violations", s.strict_violations},
          {"incomplete", s.incomplete}};
}

std::string summary_csv(const std::vector<SweepSummary>& rows) {
  std::ostringstream os;
  os.precision(12);
  os << "check,trials,min_gap,p05_gap,violations\n";
  for (const auto& r : rows)
    os << '"' << r.check << "\"," << r.trials << ',' << r.min_gap << ',' << r.p05_gap << ',' << r.violations << '\n';
  return os.str();
}

}  // namespace entlab
