#pragma once

// Entanglement measures: relative entropy of entanglement over separable or
// PPT states, its measured variants, tripartite versions, and extension-based
// upper values of the squashed and CEMI quantities.

#include <cstdint>
#include <optional>
#include <vector>

#include "entlab/measured.hpp"
#include "entlab/separable.hpp"

namespace entlab {

struct EntOptions {
  int restarts = 4;
  /// Conditional-gradient iterations for the Umegaki objective.
  int iterations = 300;
  /// Outer iterations over σ for measured / cone objectives.
  int outer = 8;
  int oracle_starts = 10;
  std::uint64_t seed = 0;
  double gap_tol = 1e-8;
  /// Budgets of the inner measured solvers.
  SolverBudget inner{4, 200, 0, 20, 40, 20};
  ConeOptions cone{60, 6, 0, nullptr};
};

struct EntMeasureValue {
  double value = 0.0;
  Direction direction = Direction::Upper;
  /// Witness state on the input layout; `sigma_sep` is set for separable witnesses.
  LabeledOperator sigma;
  std::optional<SeparableDecomposition> sigma_sep;
  std::optional<Measurement> inner;
  std::optional<ConeElement> inner_cone;
  /// Value minus the final conditional-gradient gap (exact objective only;
  /// a true lower bound when the linear oracle is exact).
  double lower_estimate = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// min D(ρ‖σ) over σ separable across `groups` (a partition of the layout).
EntMeasureValue ree(const LabeledOperator& rho, const std::vector<LabelSet>& groups, const EntOptions& opts = {});

/// Measured REE with σ separable across (first, rest). Classes ALL, LOCC1, LO
/// use the measured solvers; SEPP and PPT use the cone relaxations.
EntMeasureValue ree_measured(const LabeledOperator& rho, const LabelSet& first, MeasClass cls,
                             const EntOptions& opts = {});

/// E ≥ E_ALL ≥ E_LOCC1 ≥ E_LO on best-found values: every σ visited by any of
/// the class-wise descents is scored by the whole measured cascade, and each
/// class reports its minimum over the shared visits.
struct EntMeasuredChain {
  EntMeasureValue e, all, locc1, lo;
};
EntMeasuredChain ree_measured_chain(const LabeledOperator& rho, const LabelSet& first, const EntOptions& opts = {});

/// min D(ρ‖σ) over states with every listed partial transpose PSD. `warm`
/// (feasible) seeds the descent; the result never exceeds its value.
EntMeasureValue ppt_ree(const LabeledOperator& rho, const std::vector<LabelSet>& transposes,
                        const EntOptions& opts = {}, const LabeledOperator* warm = nullptr);
/// PPT-cone upper relaxation of D_PPT minimized over PPT σ.
EntMeasureValue ppt_ree_measured(const LabeledOperator& rho, const std::vector<LabelSet>& transposes,
                                 const EntOptions& opts = {}, const LabeledOperator* warm = nullptr);

enum class Ree3Class { Exact, All, SeppCone, PptCone };
EntMeasureValue ree3(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b, const LabelSet& c,
                     Ree3Class cls, const EntOptions& opts = {});

struct ExtensionOptions {
  int samples = 6;          // random extensions per extension dimension
  int max_dim = 4;          // extension system dimension ≤ 4
  std::uint64_t seed = 0;
  /// Adds the classical-flag extension for explicitly separable inputs.
  const SeparableDecomposition* separable = nullptr;
};
struct ExtensionValue {
  double value = 0.0;       // ½ · best term found (an upper bound on the infimum)
  LabeledOperator extension;
  int evaluated = 0;
};
/// ½ min I(A:B|E) over sampled extensions ρ_ABE.
ExtensionValue squashed_upper(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b,
                              const ExtensionOptions& opts = {});
/// ½ min [I(AĀ:BB̄) − I(Ā:B̄)] over the same extensions split as E = Ā⊗B̄;
/// never below squashed_upper on the same options.
ExtensionValue cemi_upper(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b,
                          const ExtensionOptions& opts = {});

}  // namespace entlab
