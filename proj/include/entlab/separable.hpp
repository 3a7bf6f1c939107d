#pragma once

#include <vector>

#include "entlab/layout.hpp"

namespace entlab {

/// Convex mixture Σ_k p_k ⊗_g |v_kg⟩⟨v_kg| of product pure states across
/// the label groups of a partition.
struct SeparableDecomposition {
  SystemLayout layout;
  std::vector<LabelSet> groups;
  std::vector<double> weights;
  std::vector<std::vector<CVec>> vectors;  // [term][group]

  int terms() const { return static_cast<int>(weights.size()); }
  /// Throws ContractViolation unless weights form a pmf and vectors are unit.
  void validate(double tol = 1e-10) const;
  Mat assemble_mat() const;
  LabeledOperator assemble() const;

  /// Builds a decomposition from weighted products of PSD factors (one per
  /// group) by splitting each factor into its eigenvectors. Factors need not
  /// be normalized; the weights absorb their traces. Terms below
  /// `drop_below` relative weight are discarded and the rest renormalized.
  static SeparableDecomposition from_products(const SystemLayout& layout,
                                              const std::vector<LabelSet>& groups,
                                              const std::vector<double>& weights,
                                              const std::vector<std::vector<Mat>>& factors,
                                              double drop_below = 0.0);
};

}  // namespace entlab
