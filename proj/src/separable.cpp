#include "entlab/separable.hpp"

#include <cmath>

#include "entlab/linop.hpp"

namespace entlab {

void SeparableDecomposition::validate(double tol) const {
  require_partition(layout, groups, true);
  if (vectors.size() != weights.size()) throw ContractViolation("separable: term count mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] < -tol) throw ContractViolation("separable: negative weight");
    total += weights[k];
    if (vectors[k].size() != groups.size()) throw ContractViolation("separable: group count mismatch");
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (vectors[k][g].size() != layout.dim_of(groups[g]))
        throw ContractViolation("separable: vector dimension mismatch");
      if (std::abs(vectors[k][g].norm() - 1.0) > tol) throw ContractViolation("separable: vector not unit");
    }
  }
  if (std::abs(total - 1.0) > tol) throw ContractViolation("separable: weights do not sum to 1");
}

Mat SeparableDecomposition::assemble_mat() const {
  LabelSet order;
  std::vector<int> dims;
  for (const auto& g : groups)
    for (const auto& l : g) {
      order.push_back(l);
      dims.push_back(layout.dim_of(l));
    }
  const int d = layout.total_dim();
  Mat acc = Mat::Zero(d, d);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    CVec v = vectors[k][0];
    for (std::size_t g = 1; g < groups.size(); ++g) v = kron(v, vectors[k][g]);
    acc.noalias() += weights[k] * v * v.adjoint();
  }
  return reorder(LabeledOperator(SystemLayout(order, dims), acc), layout.labels()).mat();
}

LabeledOperator SeparableDecomposition::assemble() const { return {layout, assemble_mat()}; }

SeparableDecomposition SeparableDecomposition::from_products(
    const SystemLayout& layout, const std::vector<LabelSet>& groups, const std::vector<double>& weights,
    const std::vector<std::vector<Mat>>& factors, double drop_below) {
  require_partition(layout, groups, true);
  SeparableDecomposition out{layout, groups, {}, {}};
  for (std::size_t k = 0; k < weights.size(); ++k) {
    // Expand the product of eigen-decompositions term by term.
    std::vector<std::pair<double, std::vector<CVec>>> partial{{weights[k], {}}};
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const Eigensystem es = eigh(factors[k][g]);
      std::vector<std::pair<double, std::vector<CVec>>> next;
      for (const auto& [w, vs] : partial) {
        for (Eigen::Index i = 0; i < es.dim(); ++i) {
          const double lam = es.values(i);
          if (lam <= 0.0) continue;
          auto nv = vs;
          nv.push_back(es.vectors.col(i));
          next.emplace_back(w * lam, std::move(nv));
        }
      }
      partial = std::move(next);
    }
    for (auto& [w, vs] : partial) {
      out.weights.push_back(w);
      out.vectors.push_back(std::move(vs));
    }
  }
  double total = 0.0;
  for (double w : out.weights) total += w;
  if (!(total > 0.0)) throw ContractViolation("separable: zero total weight");
  if (drop_below > 0.0) {
    SeparableDecomposition kept{layout, groups, {}, {}};
    for (std::size_t k = 0; k < out.weights.size(); ++k) {
      if (out.weights[k] >= drop_below * total) {
        kept.weights.push_back(out.weights[k]);
        kept.vectors.push_back(std::move(out.vectors[k]));
      }
    }
    out = std::move(kept);
    total = 0.0;
    for (double w : out.weights) total += w;
  }
  for (double& w : out.weights) w /= total;
  return out;
}

}  // namespace entlab
