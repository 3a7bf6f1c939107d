#pragma once

#include <string>
#include <vector>

#include "entlab/errors.hpp"
#include "entlab/linalg.hpp"

namespace entlab {

using Label = std::string;
using LabelSet = std::vector<Label>;

/// Ordered tensor-product layout: first label is the most significant factor
/// of the Kronecker index.
class SystemLayout {
 public:
  SystemLayout() = default;
  SystemLayout(LabelSet labels, std::vector<int> dims);

  const LabelSet& labels() const { return labels_; }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t size() const { return labels_.size(); }
  int total_dim() const;

  bool has(const Label& label) const;
  /// Throws LayoutError for unknown labels.
  std::size_t index_of(const Label& label) const;
  int dim_of(const Label& label) const { return dims_[index_of(label)]; }
  int dim_of(const LabelSet& labels) const;

  /// Layout restricted to `keep`, in this layout's order.
  SystemLayout restricted_to(const LabelSet& keep) const;
  /// Labels of this layout not in `drop`, in this layout's order.
  LabelSet complement(const LabelSet& drop) const;
  /// Concatenation; labels must be disjoint.
  SystemLayout concat(const SystemLayout& other) const;

  bool operator==(const SystemLayout& other) const = default;

 private:
  LabelSet labels_;
  std::vector<int> dims_;
};

/// Checks every label of `subset` is known and none repeats.
void require_labels(const SystemLayout& layout, const LabelSet& subset);
/// Checks the label sets are pairwise disjoint and, when `cover` is set, that
/// their union is the whole layout.
void require_partition(const SystemLayout& layout, const std::vector<LabelSet>& parts,
                       bool cover);

/// Square complex matrix acting on a labeled tensor-product space.
class LabeledOperator {
 public:
  LabeledOperator() = default;
  LabeledOperator(SystemLayout layout, Mat mat);

  const SystemLayout& layout() const { return layout_; }
  const Mat& mat() const { return mat_; }
  int dim() const { return static_cast<int>(mat_.rows()); }

  bool hermitian(double rel_tol = 1e-12) const { return is_hermitian(mat_, rel_tol); }
  Complex trace() const { return mat_.trace(); }

 private:
  SystemLayout layout_;
  Mat mat_;
};

/// Density operator: Hermitian, spectrum ≥ -1e-10, unit trace within 1e-10.
/// Eigenvalues below `rank_tolerance` are clipped to zero on construction.
class QuantumState {
 public:
  static QuantumState from(const LabeledOperator& op, double rank_tolerance = 0.0);
  static QuantumState from(SystemLayout layout, const Mat& mat, double rank_tolerance = 0.0) {
    return from(LabeledOperator(std::move(layout), mat), rank_tolerance);
  }

  const LabeledOperator& op() const { return op_; }
  const Mat& mat() const { return op_.mat(); }
  const SystemLayout& layout() const { return op_.layout(); }
  double rank_tolerance() const { return rank_tolerance_; }
  operator const LabeledOperator&() const { return op_; }  // NOLINT

 private:
  QuantumState(LabeledOperator op, double tol) : op_(std::move(op)), rank_tolerance_(tol) {}
  LabeledOperator op_;
  double rank_tolerance_ = 0.0;
};

/// Throws ContractViolation unless `op` satisfies the state invariants.
void require_state(const LabeledOperator& op, const char* what = "state");

}  // namespace entlab
