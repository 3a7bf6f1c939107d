#pragma once

// Labeled operator algebra: tensor products, partial traces and transposes,
// reordering, spectral calculus.

#include <vector>

#include "entlab/layout.hpp"

namespace entlab {

LabeledOperator tensor(const LabeledOperator& a, const LabeledOperator& b);

/// Traces out `drop`; remaining labels keep their relative order.
LabeledOperator partial_trace(const LabeledOperator& x, const LabelSet& drop);
/// Marginal on `keep`, in the order of the input layout.
LabeledOperator marginal(const LabeledOperator& x, const LabelSet& keep);
LabeledOperator partial_transpose(const LabeledOperator& x, const LabelSet& on);

/// Same operator with tensor factors permuted into `order` (a permutation of
/// the layout labels).
LabeledOperator reorder(const LabeledOperator& x, const LabelSet& order);
/// x ⊗ 1 on the labels of `target` missing from x, arranged in target order.
/// Every label of x must appear in target with the same dimension.
LabeledOperator embed(const LabeledOperator& x, const SystemLayout& target);
/// Matrix of `embed` only.
Mat embed_mat(const LabeledOperator& x, const SystemLayout& target);

/// Raw-matrix forms used inside solvers.
Mat permute_systems(const Mat& m, const std::vector<int>& dims, const std::vector<int>& order);
Mat partial_trace_last(const Mat& m, int keep_dim, int drop_dim);
Mat partial_trace_first(const Mat& m, int drop_dim, int keep_dim);
/// Transposes the factors at `systems` (indices into dims).
Mat partial_transpose_mat(const Mat& m, const std::vector<int>& dims, const std::vector<int>& systems);

struct Spectrum {
  RVec values;   // ascending
  Mat vectors;   // columns
};

/// Throws ContractViolation for non-Hermitian input.
Spectrum spectral(const LabeledOperator& x);

enum class MatFun { Log, Exp, Power };

/// f applied on the spectrum. Log and Power act on the support (generalized
/// inverse convention) and raise DomainError on negative spectrum.
LabeledOperator matfun(const LabeledOperator& x, MatFun f, Complex z = Complex(0.5, 0.0));

/// Σ_P P x P over the spectral projectors of `basis_of` (clustered at rel_gap).
LabeledOperator pinch(const LabeledOperator& x, const LabeledOperator& basis_of,
                      double rel_gap = 1e-8);
Mat pinch(const Mat& x, const Mat& basis_of, double rel_gap = 1e-8);

/// Number of distinct eigenvalues at relative clustering gap.
int distinct_eigenvalues(const LabeledOperator& x, double rel_gap = 1e-8);

/// n-fold tensor power with labels suffixed by the copy index ("A" -> "A1", "A2", ...).
LabeledOperator tensor_power(const LabeledOperator& x, int n);

LabeledOperator identity(const SystemLayout& layout);

}  // namespace entlab
