#pragma once

// β₀ quadrature, rotated Petz recovery maps, their averages and compositions,
// the transpose identity, and the γ constructions used by the monogamy
// witnesses.

#include <optional>
#include <vector>

#include "entlab/layout.hpp"
#include "entlab/separable.hpp"

namespace entlab {

/// β₀(t) = (π/2)/(cosh πt + 1).
double beta0_density(double t);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double truncation = 0.0;
  int count() const { return static_cast<int>(nodes.size()); }
};

/// Symmetric trapezoid rule on [−T, T] with n (odd, ≥ 3) nodes; the weights
/// h·β₀(t_i) sum to one up to the tail mass beyond T.
QuadratureRule beta0_rule(int n = 201, double truncation = 10.0);

/// X ↦ K (X ⊗ 1_N) K† with K = ρ_T^{(1+it)/2}(ρ_S^{−(1+it)/2} ⊗ 1_N) on the
/// anchor layout T, source S ⊂ T, added systems N = T∖S.
class RecoveryMap {
 public:
  RecoveryMap(SystemLayout anchor_layout, LabelSet source, LabelSet added, double t, Mat k, Mat source_support);

  const SystemLayout& anchor_layout() const { return anchor_; }
  const LabelSet& source() const { return source_; }
  const LabelSet& added() const { return added_; }
  double t() const { return t_; }
  const Mat& kraus() const { return k_; }

  /// Input layout with the added labels appended. Throws CompositionError
  /// unless the input holds the source labels and none of the added ones.
  SystemLayout output_layout(const SystemLayout& in) const;
  /// K (x ⊗ 1_N), x not necessarily Hermitian.
  LabeledOperator left(const LabeledOperator& x) const;
  LabeledOperator apply(const LabeledOperator& x) const;

  /// Σ |i⟩⟨j| ⊗ R(|i⟩⟨j|) with input on S and output on S then N.
  Mat choi() const;
  /// max |tr_N K†K − Π_S|.
  double tp_deviation() const;

 private:
  SystemLayout anchor_;
  LabelSet source_, added_;
  double t_;
  Mat k_, support_;
};

/// Precomputed spectra of an anchor and its source marginal.
class PetzFamily {
 public:
  /// Throws DomainError if the anchor has negative spectrum.
  PetzFamily(const LabeledOperator& anchor, const LabelSet& source);
  RecoveryMap at(double t) const;
  const SystemLayout& anchor_layout() const { return anchor_; }
  const LabelSet& source() const { return source_; }
  const LabelSet& added() const { return added_; }

 private:
  SystemLayout anchor_;
  LabelSet source_, added_;
  Eigensystem full_, marg_;
  SystemLayout source_layout_;
};

RecoveryMap rotated_petz(const LabeledOperator& anchor, const LabelSet& source, double t);

/// Stages applied in order at a shared t (tensor products of maps on
/// disjoint systems are stages too, since they commute).
using RecoveryPlan = std::vector<PetzFamily>;

LabeledOperator recover_at(const RecoveryPlan& plan, double t, const LabeledOperator& input);
/// ∫dβ₀ applied nodewise, accumulated in node order.
LabeledOperator averaged_recover(const RecoveryPlan& plan, const QuadratureRule& rule, const LabeledOperator& input);
/// F(target, R_t(input)) per node, F = ‖√ρ√σ‖₁². `target` is reordered to the
/// output layout.
std::vector<double> node_fidelities(const RecoveryPlan& plan, const QuadratureRule& rule,
                                    const LabeledOperator& input, const LabeledOperator& target);
/// −Σ_i w_i log F_i.
double fidelity_bound(const QuadratureRule& rule, const std::vector<double>& fidelities);

/// Max entrywise deviation between the Choi operators of T∘R^{[t]} and
/// R̃∘T, with R̃ the recovery map of the fully transposed anchor at −t.
double transpose_twirl_identity(const LabeledOperator& anchor, const LabelSet& source, double t);

/// X = Σ_x F^x ⊗ |e_x⟩⟨e_x| with orthonormal e_x on `classical` and PSD F^x
/// on the remaining labels of `layout` (kept in layout order).
struct CqOperator {
  SystemLayout layout;
  Label classical;
  std::vector<CVec> basis;
  std::vector<Mat> blocks;

  Mat assemble() const;
  /// X^z on the support.
  Mat power(Complex z) const;
  /// Throws CertificateError unless the basis is orthonormal and complete
  /// and every block is PSD.
  void validate(double tol = 1e-10) const;
};

struct SqGamma {
  LabeledOperator gamma_x;    // ∫ tr_C γ^t, on the layout of X
  LabeledOperator numerator;  // tr_{B'}∫ X^{(1+it)/2} γ^t X^{(1−it)/2}, on A,C
  LabeledOperator gamma_hat;  // numerator / tr[X γ_x]
  double norm = 0.0;          // tr[X γ_x]
  std::optional<SeparableDecomposition> dec_x, dec_hat;
};

/// γ^t = (id_A ⊗ R_t)(σ_AC) with R_t: C → B'C anchored at ρ_{B'C}. `x` lives
/// on [A..., B'] with B' classical. With `decompose`, σ's decomposition is
/// pushed through to certificates for γ_x (A:B') and γ̂ (A:C).
SqGamma gamma_construction(const LabeledOperator& rho_bpc, const LabelSet& c, const SeparableDecomposition& sigma_ac,
                           const CqOperator& x, const QuadratureRule& rule, bool decompose = false);
/// The same numerator assembled with every x ≠ x' cross term kept.
LabeledOperator gamma_numerator_double_sum(const LabeledOperator& rho_bpc, const LabelSet& c,
                                           const LabeledOperator& sigma_ac, const CqOperator& x,
                                           const QuadratureRule& rule);

struct CemiGamma {
  LabeledOperator gamma;      // ∫(⊗R_g)(σ) on [Ā..., A...]
  LabeledOperator gamma_x;    // tr_Ā γ
  LabeledOperator numerator;  // tr_A[(X ⊗ 1) γ]
  LabeledOperator gamma_hat;  // numerator / tr[X γ_x]
  double norm = 0.0;
};

/// γ = ∫dβ₀ (⊗_g R_g^{[t]})(σ), with one family per party (source Ā_g).
/// `x` is on the added labels A_g; γ̂ = tr_A[(X⊗1)γ]/tr[Xγ_A].
CemiGamma cemi_gamma(const RecoveryPlan& maps, const LabeledOperator& sigma, const LabeledOperator& x,
                     const QuadratureRule& rule);
/// Certificate for γ̂ when σ is separable across the Ā_g and X is a product
/// mixture Σ_j w_j ⊗_g |x_jg⟩⟨x_jg| across the A_g.
SeparableDecomposition cemi_gamma_hat_decomposition(const RecoveryPlan& maps, const SeparableDecomposition& sigma,
                                                    const std::vector<double>& x_weights,
                                                    const std::vector<std::vector<CVec>>& x_factors,
                                                    const QuadratureRule& rule);

}  // namespace entlab
