#pragma once

// Measured relative entropies: D_ALL via its variational form, the pinching
// lower bound, LOCC₁ and LO solvers on the Naimark-embedded systems, cone
// relaxations for SEPP/PPT, and restricted fidelity / norm estimates.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "entlab/layout.hpp"
#include "entlab/random.hpp"

namespace entlab {

enum class MeasClass { All, LO, LOCC1, SEPP, PPT };
enum class Direction { Exact, Lower, Upper, Heuristic };

const char* to_string(MeasClass c);
const char* to_string(Direction d);
MeasClass meas_class_from_string(const std::string& s);

/// POVM with class structure. Elements act on `layout`; the structural parts
/// act on the local groups `first` and `second`.
struct Measurement {
  MeasClass cls = MeasClass::All;
  SystemLayout layout;
  std::vector<Mat> elements;

  LabelSet first, second;
  /// LOCC₁: rank-1 POVM on `first` (≤ d² outcomes). LO: POVM on `first`.
  std::vector<Mat> first_povm;
  /// LOCC₁: conditional projectors on `second`, indexed [x][z].
  std::vector<std::vector<Mat>> conditional;
  /// LO: POVM on `second`.
  std::vector<Mat> second_povm;
  /// Naimark unitaries on first⊗first (and second⊗second for LO) whose
  /// computational columns, restricted to the |·⟩⊗|0⟩ embedding, give the
  /// rank-1 POVM vectors.
  Mat naimark_first, naimark_second;

  /// Throws ContractViolation unless Σ elements = 1 within tol, elements are
  /// PSD, and the class structure reproduces the elements.
  void validate(double tol = 1e-10) const;
};

/// Born-rule pmf tr(ρ M^z), clipped at zero.
std::vector<double> born(const Mat& rho, const Measurement& m);
/// Σ p(log p − log q) over supp p; +inf if supp p ⊄ supp q.
double kl(const std::vector<double>& p, const std::vector<double>& q);
/// KL of the outcome pmfs of m on (ρ, σ).
double evaluate(const Measurement& m, const Mat& rho, const Mat& sigma);
/// ω = Σ_z (p_z/q_z) M^z with ratios floored at `floor`·max ratio, scaled to tr σω = 1.
Mat variational_omega(const Measurement& m, const Mat& rho, const Mat& sigma, double floor = 1e-12);
/// tr ρ log ω − log tr σω.
double variational_value(const Mat& rho, const Mat& sigma, const Mat& omega);

/// Element of one of the cones in the variational bounds.
struct ConeElement {
  MeasClass cone = MeasClass::All;
  /// Layout of `op`: the groups concatenated (SEPP) or the input layout (PPT).
  SystemLayout layout;
  Mat op;
  /// SEPP: op = Σ_j w_j ⊗_g |f_jg⟩⟨f_jg|.
  std::vector<double> weights;
  std::vector<std::vector<CVec>> factors;
  /// CQ on the Naimark-extended first system: op = Σ_x P^x ⊗ ω^x.
  std::vector<Mat> projectors, blocks;

  /// Re-assembles the certificate and compares with `op`; returns the max
  /// entrywise deviation (SEPP) or the most negative eigenvalue (PPT,
  /// negated). Throws CertificateError on structural violations.
  double check(const std::vector<int>& dims, const std::vector<std::vector<int>>& transposes = {}) const;
};

struct MeasuredValue {
  double value = 0.0;
  Direction direction = Direction::Lower;
  bool support_ok = true;
  Measurement witness;
  std::optional<ConeElement> cone;
  /// Variational witness with tr σω = 1 (Danskin gradient of the value in σ is −ω).
  Mat omega;
  /// Certified-if-oracle-exact upper estimate (cone bounds: value + FW gap).
  double upper_estimate = 0.0;
  int iterations = 0;
  bool converged = true;
  bool incomplete = false;
  std::vector<double> trace;
  int spec_count = 0;  // d_pinch only
};

struct SolverBudget {
  int restarts = 20;
  int iterations = 500;
  std::uint64_t seed = 0;
  /// Budget of the conditional D_ALL subproblems inside LOCC₁.
  int inner_fw = 30;
  int inner_polish = 60;
  /// Outer alternation rounds per restart.
  int rounds = 40;
};

struct DallOptions {
  int fw_iterations = 500;
  int polish_iterations = 200;
  double gap_tol = 1e-8;
  const Mat* warm_omega = nullptr;
  const Mat* warm_basis = nullptr;  // unitary whose columns seed a polish start
};

MeasuredValue d_all(const Mat& rho, const Mat& sigma, const DallOptions& opts = {});
MeasuredValue d_all(const LabeledOperator& rho, const LabeledOperator& sigma, const DallOptions& opts = {});

MeasuredValue d_pinch(const Mat& rho, const Mat& sigma, double rel_gap = 1e-8);
MeasuredValue d_pinch(const LabeledOperator& rho, const LabeledOperator& sigma, double rel_gap = 1e-8);

/// One-way LOCC from `first` to the remaining labels. `warm` may be an LO or
/// LOCC₁ measurement on the same layout and split; the result is then never
/// below its KL value.
MeasuredValue d_locc1(const LabeledOperator& rho, const LabeledOperator& sigma, const LabelSet& first,
                      const SolverBudget& budget = {}, const Measurement* warm = nullptr);
MeasuredValue d_lo(const LabeledOperator& rho, const LabeledOperator& sigma, const LabelSet& first,
                   const SolverBudget& budget = {});

/// Cone relaxation sup{tr ρ log ω − log tr σω : ω in the cone} for SEPP
/// across `groups` or PPT across every listed transpose set. `warm` must lie
/// in the cone (for SEPP pass a separable ConeElement).
struct ConeOptions {
  int iterations = 200;
  int oracle_starts = 10;
  std::uint64_t seed = 0;
  const ConeElement* warm = nullptr;
};
MeasuredValue cone_bound(const LabeledOperator& rho, const LabeledOperator& sigma, MeasClass cone,
                         const std::vector<LabelSet>& groups, const ConeOptions& opts = {});
/// PPT cone with explicit transpose sets (label sets).
MeasuredValue cone_bound_ppt(const LabeledOperator& rho, const LabeledOperator& sigma,
                             const std::vector<LabelSet>& transposes, const ConeOptions& opts = {});

/// ConeElement (SEPP) built from an LO witness: Σ r_xy Q^x ⊗ Q^y.
/// Normalized to tr σω = 1; its variational value is at least the LO KL.
ConeElement lo_cone_element(const Measurement& lo, const LabeledOperator& rho, const LabeledOperator& sigma);

/// D_LO ≤ D_LOCC₁ ≤ D_ALL estimates computed as a warm-started cascade so the
/// ordering holds on the returned values.
struct MeasuredChain {
  MeasuredValue lo, locc1, all;
  double umegaki = 0.0;
};
MeasuredChain measured_chain(const LabeledOperator& rho, const LabeledOperator& sigma, const LabelSet& first,
                             const SolverBudget& budget = {});

struct FidNorm {
  double fidelity = 1.0;   // F_M estimate (min over candidate measurements)
  double norm = 0.0;       // ‖ρ−σ‖_M estimate (max over candidates)
  double divergence = 0.0; // D_M estimate consistent with the candidates
  Direction direction = Direction::Exact;
};
FidNorm restricted_fid_norm(const LabeledOperator& rho, const LabeledOperator& sigma, MeasClass cls,
                            const LabelSet& first = {}, const SolverBudget& budget = {});

/// Measurement on the input of a one-way LOCC channel whose statistics on
/// (ρ, σ) equal those of `m` on (G(ρ), G(σ)).
Measurement pullback_locc1(const Measurement& m, const OneWayChannel& g);

}  // namespace entlab
