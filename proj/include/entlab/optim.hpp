#pragma once

// Optimization kernels shared by the measured-divergence and entanglement
// solvers: unitary ascent of per-column KL objectives, the best-product-state
// oracle, and Dykstra projection onto PSD/PPT/affine intersections.

#include <vector>

#include "entlab/linalg.hpp"
#include "entlab/random.hpp"

namespace entlab {

/// Operator families for one column u of a unitary: the column contributes
/// Σ_z p_z log(p_z/q_z) with p_z = u†R_z u and q_z = u†S_z u.
struct ColumnFamily {
  std::vector<Mat> r;
  std::vector<Mat> s;
};

/// KL-type objective of the columns of u. `families` has one entry per column,
/// or a single entry shared by every column.
double column_objective(const Mat& u, const std::vector<ColumnFamily>& families);

struct AscentResult {
  Mat u;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Riemannian gradient ascent over the unitary group, u ← u·exp(sΩ) with Ω
/// the anti-Hermitian part of u†W and Armijo backtracking on s.
AscentResult ascend_columns(Mat u, const std::vector<ColumnFamily>& families, int max_iter,
                            double tol = 1e-13);

struct ProductVector {
  std::vector<CVec> factors;
  CVec vec;
  double value = 0.0;
};

/// Maximizes ⟨s|G|s⟩/⟨s|N|s⟩ over product unit vectors s = s₁⊗…⊗s_m with
/// factor dims `dims` (Kronecker order). `n == nullptr` means N = 1. Each
/// start is refined by alternating generalized top-eigenvector updates.
ProductVector best_product_vector(const Mat& g, const Mat* n, const std::vector<int>& dims, Rng& rng,
                                  int starts, const std::vector<std::vector<CVec>>& seeds = {});

/// ⊗ factors.
CVec kron_all(const std::vector<CVec>& factors);

struct ProjectionSpec {
  std::vector<int> dims;
  std::vector<std::vector<int>> transposes;  // each entry: systems whose partial transpose must be PSD
  const Mat* affine = nullptr;               // optional constraint tr(C·X) = c
  double affine_value = 1.0;
  int max_iter = 2000;
  double tol = 1e-9;
};

/// Frobenius projection of a Hermitian x onto PSD ∩ PPT(transposes) ∩ affine
/// by Dykstra's alternating projections.
Mat dykstra_project(const Mat& x, const ProjectionSpec& spec);

/// Smallest eigenvalue over x and each listed partial transpose.
double min_ppt_eigenvalue(const Mat& x, const std::vector<int>& dims,
                          const std::vector<std::vector<int>>& transposes);

/// PSD part V max(Λ,0) V†.
Mat psd_part(const Mat& h);

}  // namespace entlab
