// Acceptance suite: one PASS/FAIL line per criterion; exit status is the
// number of failed criteria (capped at 1).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "entlab/entmeasures.hpp"
#include "entlab/entropy.hpp"
#include "entlab/inequalities.hpp"
#include "entlab/linop.hpp"
#include "entlab/measured.hpp"
#include "entlab/random.hpp"
#include "entlab/recovery.hpp"

using namespace entlab;

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double worst_strict_layer(const GapReport& r) {
  double w = kInfinity;
  for (const auto& l : r.layers)
    if (l.strict) w = std::min(w, l.two_sided ? -std::abs(l.gap) : l.gap);
  return w;
}

bool any_strict_layer_failed(const GapReport& r) {
  for (const auto& l : r.layers)
    if (l.strict && l.violated) return true;
  return false;
}

// ---- criterion 1 ----------------------------------------------------------------
Outcome identities() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_exp = 0.0, worst_cls = 0.0;
  CheckConfig cfg;
  cfg.seed = 101;
  for (int t = 0; t < 100; ++t) worst_exp = std::max(worst_exp, std::abs(run_trial("exp_state", cfg, t).gap));
  cfg.dims = {{"B", 3}};
  for (int t = 0; t < 25; ++t) worst_exp = std::max(worst_exp, std::abs(run_trial("exp_state", cfg, t).gap));
  cfg.dims.clear();
  for (int t = 0; t < 100; ++t) {
    const GapReport r = run_trial("classical", cfg, t);
    worst_cls = std::max(worst_cls, std::abs(r.gap));
    for (const auto& l : r.layers) worst_cls = std::max(worst_cls, std::abs(l.gap));
  }
  const double secs = seconds_since(t0);
  return {worst_exp <= 1e-8 && worst_cls <= 1e-12 && secs <= 60,
          fmt("max |exp_state gap| %.2e (<=1e-8), max classical dev %.2e (<=1e-12), %.1fs", worst_exp, worst_cls, secs)};
}

// ---- criterion 2 ----------------------------------------------------------------
Outcome golden_thompson() {
  const auto t0 = std::chrono::steady_clock::now();
  double min_gap = kInfinity, max_quad = 0.0;
  for (int n = 2; n <= 6; ++n)
    for (int p = 1; p <= 2; ++p)
      for (int d : {3, 4}) {
        CheckConfig cfg;
        cfg.seed = 202;
        cfg.quad_n = 201;  // cross-validated inside the check at 2N−1 = 401 nodes
        cfg.dims = {{"H", d}};
        const std::string id = "gt_multi(" + std::to_string(n) + "," + std::to_string(p) + ")";
        for (int t = 0; t < 200; ++t) {
          const GapReport r = run_trial(id, cfg, t);
          min_gap = std::min(min_gap, r.gap);
          for (const auto& l : r.layers) max_quad = std::max(max_quad, std::abs(l.gap));
        }
      }
  const double secs = seconds_since(t0);
  return {min_gap >= -1e-7 && max_quad <= 1e-9 && secs <= 300,
          fmt("min gap %.3e (>=-1e-7), max |N=201 - N=401| %.2e (<=1e-9), %.1fs", min_gap, max_quad, secs)};
}

// ---- criterion 3 ----------------------------------------------------------------
Outcome peierls_bogoliubov() {
  CheckConfig cfg;
  cfg.seed = 303;
  double min_gap = kInfinity, worst_norm = 0.0;
  for (int t = 0; t < 200; ++t) {
    const GapReport r = run_trial("pb", cfg, t);
    min_gap = std::min(min_gap, r.gap);
    worst_norm = std::max(worst_norm, std::abs(r.quantities.front().value - 1.0));
  }
  return {min_gap >= -1e-9 && worst_norm <= 1e-12,
          fmt("min gap %.3e (>=-1e-9), max |tr exp G1 - 1| %.1e", min_gap, worst_norm)};
}

// ---- criterion 4 ----------------------------------------------------------------
Outcome recovery_suite() {
  Rng rng(404);
  double min_choi = kInfinity, max_tp = 0.0, max_tr = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int dc = 2 + k % 2, db = 2;
    const LabeledOperator anchor = ginibre_state(SystemLayout({"B", "C"}, {db, dc}), rng, k % 3 == 0 ? 2 : 0).op();
    const double t = 10.0 * rng.uniform() - 5.0;
    const RecoveryMap r = rotated_petz(anchor, {"C"}, t);
    min_choi = std::min(min_choi, min_eigenvalue(hermitian_part(r.choi())));
    max_tp = std::max(max_tp, r.tp_deviation());
    max_tr = std::max(max_tr, transpose_twirl_identity(anchor, {"C"}, t));
  }
  CheckConfig cfg;
  cfg.seed = 405;
  double max_cqmi = 0.0, max_dist = 0.0;
  for (int t = 0; t < 50; ++t) {
    const GapReport r = run_trial("markov_zero", cfg, t);
    max_cqmi = std::max(max_cqmi, std::abs(r.lhs));
    for (const auto& l : r.layers) max_dist = std::max(max_dist, std::abs(l.gap));
  }
  return {min_choi >= -1e-9 && max_tp <= 1e-9 && max_cqmi <= 1e-9 && max_dist <= 1e-8 && max_tr <= 1e-9,
          fmt("min Choi eig %.1e, TP dev %.1e, Markov CQMI %.1e / recovery %.1e", min_choi, max_tp, max_cqmi,
              max_dist) +
              fmt(", transpose identity %.1e", max_tr)};
}

// ---- criterion 5 ----------------------------------------------------------------
Outcome fidelity_recoverability() {
  const auto t0 = std::chrono::steady_clock::now();
  CheckConfig cfg;
  cfg.seed = 505;
  double g1 = kInfinity, g2 = kInfinity, g3 = kInfinity;
  for (int t = 0; t < 100; ++t) g1 = std::min(g1, run_trial("cemi_recover_fid", cfg, t).gap);
  for (int t = 0; t < 50; ++t) g2 = std::min(g2, run_trial("squashed_multi_recover", cfg, t).gap);
  for (int t = 0; t < 20; ++t) g3 = std::min(g3, run_trial("cemi_multi_recover", cfg, t).gap);
  const double secs = seconds_since(t0);
  return {g1 >= -1e-6 && g2 >= -1e-6 && g3 >= -1e-6 && secs <= 900,
          fmt("min gaps cemi %.3e, squashed-multi %.3e, cemi-multi %.3e (>=-1e-6), %.1fs", g1, g2, g3, secs)};
}

// ---- criterion 6 ----------------------------------------------------------------

// Qubit D_ALL oracle: rank-one projective measurements suffice, so maximize the
// two-outcome KL over Bloch directions (grid, then shrinking pattern search).
double bloch_oracle(const Mat& rho, const Mat& sigma) {
  auto kl_dir = [&](double th, double ph) {
    CVec v(2);
    v << std::cos(th / 2), std::polar(std::sin(th / 2), ph);
    const Mat p0 = v * v.adjoint();
    const double p = std::clamp((rho * p0).trace().real(), 0.0, 1.0);
    const double q = std::clamp((sigma * p0).trace().real(), 0.0, 1.0);
    auto term = [](double a, double b) { return a > 0 ? a * std::log(a / b) : 0.0; };
    return term(p, q) + term(1 - p, 1 - q);
  };
  double best = -1.0, bt = 0, bp = 0;
  const int nt = 90, np = 180;
  for (int i = 0; i <= nt; ++i)
    for (int j = 0; j < np; ++j) {
      const double th = std::numbers::pi * i / nt, ph = 2 * std::numbers::pi * j / np;
      const double v = kl_dir(th, ph);
      if (v > best) best = v, bt = th, bp = ph;
    }
  for (double h = 0.05; h > 1e-10; h *= 0.5)
    for (bool moved = true; moved;) {
      moved = false;
      for (auto [dt, dp] : {std::pair{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}}) {
        const double v = kl_dir(bt + dt, bp + dp);
        if (v > best) best = v, bt += dt, bp += dp, moved = true;
      }
    }
  return best;
}

Outcome solver_calibration() {
  Rng rng(606);
  const SystemLayout q({"A"}, {2});
  double max_comm = 0.0;
  for (int k = 0; k < 25; ++k) {
    // Commuting pair: common eigenbasis.
    const int d = 2 + k % 3;
    const Mat u = random_unitary(d, rng);
    RVec p(d), s(d);
    for (int i = 0; i < d; ++i) p(i) = 0.05 + rng.uniform(), s(i) = 0.05 + rng.uniform();
    p /= p.sum();
    s /= s.sum();
    const Mat rho = u * p.cast<Complex>().asDiagonal() * u.adjoint();
    const Mat sigma = u * s.cast<Complex>().asDiagonal() * u.adjoint();
    max_comm = std::max(max_comm, std::abs(d_all(rho, sigma).value - umegaki(rho, sigma).value));
  }
  double max_grid = 0.0;
  for (int k = 0; k < 25; ++k) {
    const Mat rho = ginibre_state(q, rng).mat(), sigma = ginibre_state(q, rng).mat();
    max_grid = std::max(max_grid, std::abs(d_all(rho, sigma).value - bloch_oracle(rho, sigma)));
  }
  CheckConfig cfg;
  cfg.seed = 607;
  double min_sand = kInfinity;
  bool layers_ok = true;
  for (int n = 1; n <= 3; ++n)
    for (int t = 0; t < 10; ++t) {
      const GapReport r = run_trial("achiev_sandwich(" + std::to_string(n) + ")", cfg, t);
      min_sand = std::min(min_sand, r.gap);
      layers_ok = layers_ok && !any_strict_layer_failed(r);
    }
  return {max_comm <= 1e-6 && max_grid <= 1e-4 && min_sand >= -1e-8 && layers_ok,
          fmt("commuting |D_ALL - D| %.1e (<=1e-6), |D_ALL - Bloch grid| %.1e (<=1e-4), pinching sandwich min %.2e",
              max_comm, max_grid, min_sand)};
}

// ---- criterion 7 ----------------------------------------------------------------
Outcome ordering_chains() {
  Rng rng(707);
  const SystemLayout l({"A", "B"}, {2, 2});
  double worst_meas = 0.0, worst_ent = 0.0, worst_all_pinsker = 0.0, worst_loc_pinsker = 0.0;
  const EntOptions eo = CheckConfig::desk_options();
  const SolverBudget sb{4, 200, 7, 20, 40, 20};
  for (int k = 0; k < 25; ++k) {
    const LabeledOperator rho = ginibre_state(l, rng).op(), sigma = ginibre_state(l, rng).op();
    const MeasuredChain c = measured_chain(rho, sigma, {"A"}, sb);
    worst_meas = std::max({worst_meas, c.lo.value - c.locc1.value, c.locc1.value - c.all.value,
                           c.all.value - c.umegaki});
    EntOptions o = eo;
    o.seed = static_cast<std::uint64_t>(k);
    const EntMeasuredChain e = ree_measured_chain(rho, {"A"}, o);
    worst_ent = std::max({worst_ent, e.all.value - e.e.value, e.locc1.value - e.all.value, e.lo.value - e.locc1.value});
    const FidNorm a = restricted_fid_norm(rho, sigma, MeasClass::All);
    const double fa = -std::log(a.fidelity);
    worst_all_pinsker = std::max({worst_all_pinsker, fa - a.divergence, 0.25 * a.norm * a.norm - fa});
    for (MeasClass m : {MeasClass::LO, MeasClass::LOCC1}) {
      const FidNorm r = restricted_fid_norm(rho, sigma, m, {"A"}, sb);
      const double f = -std::log(r.fidelity);
      worst_loc_pinsker = std::max({worst_loc_pinsker, f - r.divergence, 0.25 * r.norm * r.norm - f});
    }
  }
  return {worst_meas <= 1e-4 && worst_ent <= 1e-4 && worst_all_pinsker <= 1e-7 && worst_loc_pinsker <= 1e-3,
          fmt("max violations: D chain %.1e, E chain %.1e (<=1e-4); Pinsker ALL %.1e (<=1e-7), LO/LOCC1 %.1e (<=1e-3)",
              worst_meas, worst_ent, worst_all_pinsker, worst_loc_pinsker)};
}

// ---- criterion 8 ----------------------------------------------------------------
Outcome entanglement_calibration() {
  const SystemLayout l({"A", "B"}, {2, 2});
  CVec v = CVec::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  const Mat phi = v * v.adjoint();
  const LabeledOperator bell(l, phi);
  // Grid oracle over the isotropic family σ(p) = pΦ + (1−p)(1−Φ)/3, separable iff p ≤ ½.
  double grid = kInfinity;
  for (int i = 1; i <= 5000; ++i) {
    const double p = 0.5 * i / 5000.0;
    const Mat s = p * phi + (1 - p) * (Mat::Identity(4, 4) - phi) / 3.0;
    grid = std::min(grid, umegaki(phi, s).value);
  }
  const EntOptions o = CheckConfig::desk_options();
  const EntMeasureValue eb = ree(bell, {{"A"}, {"B"}}, o);
  double max_witness = std::abs(umegaki(bell, eb.sigma).value - eb.value);
  Rng rng(808);
  double max_sep = 0.0, max_ppt_excess = -kInfinity;
  for (int k = 0; k < 10; ++k) {
    const LabeledOperator s = separable_mixture(l, {{"A"}, {"B"}}, 4, rng).assemble();
    const EntMeasureValue e = ree(s, {{"A"}, {"B"}}, o);
    max_sep = std::max(max_sep, e.value);
    max_witness = std::max(max_witness, std::abs(umegaki(s, e.sigma).value - e.value));
    const LabeledOperator r = ginibre_state(l, rng).op();
    const EntMeasureValue er = ree(r, {{"A"}, {"B"}}, o);
    const EntMeasureValue pr = ppt_ree(r, {{"B"}}, o, &er.sigma);
    max_ppt_excess = std::max(max_ppt_excess, pr.value - er.value);
    max_witness = std::max({max_witness, std::abs(umegaki(r, er.sigma).value - er.value),
                            std::abs(umegaki(r, pr.sigma).value - pr.value)});
  }
  const double err = std::abs(eb.value - std::log(2.0));
  return {err <= 2e-3 && std::abs(grid - std::log(2.0)) <= 2e-3 && max_sep <= 1e-4 && max_ppt_excess <= 1e-6 &&
              max_witness <= 1e-8,
          fmt("ree(Bell) %.6f vs grid %.6f, separable ree max %.1e, ppt_ree - ree max %.1e", eb.value, grid, max_sep,
              max_ppt_excess) +
              fmt(", witness re-evaluation %.1e", max_witness)};
}

// ---- criterion 9 ----------------------------------------------------------------
Outcome monogamy() {
  const auto t0 = std::chrono::steady_clock::now();
  CheckConfig cfg;
  cfg.seed = 909;
  std::string detail;
  bool ok = true;
  for (const char* id : {"sq_main", "state_redistribution", "post_li_winter", "cemi_main", "cemi_ppt", "piani_cemi",
                         "cemi_multi_faithful"}) {
    const SweepResult s = run_sweep(id, cfg, 50);
    double chain = kInfinity;
    int strict_fail = 0;
    for (const auto& r : s.reports) {
      chain = std::min(chain, worst_strict_layer(r));
      strict_fail += any_strict_layer_failed(r);
    }
    const bool pass = s.summary.min_gap >= -1e-3 && strict_fail == 0 && s.summary.incomplete == 0;
    ok = ok && pass;
    detail += std::string(id) + fmt(" %.2e/%.1e", s.summary.min_gap, chain) + (pass ? "; " : " FAILED; ");
  }
  const double secs = seconds_since(t0);
  return {ok && secs <= 1800, "min gap/strict-layer slack: " + detail + fmt("%.0fs", secs)};
}

// ---- criterion 10 ---------------------------------------------------------------
Outcome determinism() {
  CheckConfig cfg;
  cfg.seed = 1010;
  bool same = true;
  for (const char* id : {"ssa", "gt_multi(4,2)", "cemi_recover_fid", "cemi_ppt", "sq_main", "locc1_dpi"}) {
    const SweepResult a = run_sweep(id, cfg, 4, 1);
    const SweepResult b = run_sweep(id, cfg, 4, 4);
    const SweepResult c = run_sweep(id, cfg, 4, 1);
    for (int t = 0; t < 4; ++t) {
      const std::string ja = to_json(a.reports[t]).dump();
      same = same && ja == to_json(b.reports[t]).dump() && ja == to_json(c.reports[t]).dump();
    }
    same = same && to_json(a.summary).dump() == to_json(b.summary).dump();
  }
  return {same, same ? "reports byte-identical across reruns and parallelism 1 vs 4" : "reports differ"};
}

}  // namespace

// With no argument every criterion runs; `acceptance K` runs criterion K only.
int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"identity suite", identities},
      {"Golden-Thompson suite", golden_thompson},
      {"Peierls-Bogoliubov", peierls_bogoliubov},
      {"recovery suite", recovery_suite},
      {"fidelity-form recoverability", fidelity_recoverability},
      {"measured-divergence calibration", solver_calibration},
      {"ordering chains", ordering_chains},
      {"entanglement-measure calibration", entanglement_calibration},
      {"monogamy non-violation", monogamy},
      {"determinism", determinism},
  };
  const std::size_t only = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 0;
  if (only > criteria.size()) {
    std::fprintf(stderr, "no criterion %zu\n", only);
    return 2;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && i + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu (%s): %s - %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
