#include "entlab/layout.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace entlab {

SystemLayout::SystemLayout(LabelSet labels, std::vector<int> dims)
    : labels_(std::move(labels)), dims_(std::move(dims)) {
  if (labels_.size() != dims_.size())
    throw LayoutError("layout: " + std::to_string(labels_.size()) + " labels but " +
                      std::to_string(dims_.size()) + " dims");
  std::set<Label> seen;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw LayoutError("layout: empty label");
    if (!seen.insert(labels_[i]).second) throw LayoutError("layout: duplicate label '" + labels_[i] + "'");
    if (dims_[i] < 1) throw LayoutError("layout: label '" + labels_[i] + "' has dimension < 1");
  }
}

int SystemLayout::total_dim() const {
  int d = 1;
  for (int x : dims_) d *= x;
  return d;
}

bool SystemLayout::has(const Label& label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t SystemLayout::index_of(const Label& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw LayoutError("layout: unknown label '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

int SystemLayout::dim_of(const LabelSet& labels) const {
  int d = 1;
  for (const auto& l : labels) d *= dim_of(l);
  return d;
}

SystemLayout SystemLayout::restricted_to(const LabelSet& keep) const {
  require_labels(*this, keep);
  LabelSet labels;
  std::vector<int> dims;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (std::find(keep.begin(), keep.end(), labels_[i]) != keep.end()) {
      labels.push_back(labels_[i]);
      dims.push_back(dims_[i]);
    }
  }
  return {labels, dims};
}

LabelSet SystemLayout::complement(const LabelSet& drop) const {
  require_labels(*this, drop);
  LabelSet out;
  for (const auto& l : labels_)
    if (std::find(drop.begin(), drop.end(), l) == drop.end()) out.push_back(l);
  return out;
}

SystemLayout SystemLayout::concat(const SystemLayout& other) const {
  LabelSet labels = labels_;
  std::vector<int> dims = dims_;
  labels.insert(labels.end(), other.labels_.begin(), other.labels_.end());
  dims.insert(dims.end(), other.dims_.begin(), other.dims_.end());
  return {labels, dims};
}

void require_labels(const SystemLayout& layout, const LabelSet& subset) {
  std::set<Label> seen;
  for (const auto& l : subset) {
    layout.index_of(l);
    if (!seen.insert(l).second) throw LayoutError("label '" + l + "' listed twice");
  }
}

void require_partition(const SystemLayout& layout, const std::vector<LabelSet>& parts, bool cover) {
  std::set<Label> seen;
  for (const auto& part : parts) {
    for (const auto& l : part) {
      layout.index_of(l);
      if (!seen.insert(l).second) throw LayoutError("label '" + l + "' appears in overlapping sets");
    }
  }
  if (cover && seen.size() != layout.size())
    throw LayoutError("label sets do not cover the layout");
}

LabeledOperator::LabeledOperator(SystemLayout layout, Mat mat)
    : layout_(std::move(layout)), mat_(std::move(mat)) {
  const int d = layout_.total_dim();
  if (mat_.rows() != d || mat_.cols() != d)
    throw LayoutError("operator of size " + std::to_string(mat_.rows()) + "x" +
                      std::to_string(mat_.cols()) + " does not match layout dimension " +
                      std::to_string(d));
}

void require_state(const LabeledOperator& op, const char* what) {
  if (!op.hermitian(1e-10)) throw ContractViolation(std::string(what) + ": operator is not Hermitian");
  const Eigensystem es = eigh(op.mat());
  if (es.values(0) < -1e-10)
    throw ContractViolation(std::string(what) + ": negative eigenvalue " + std::to_string(es.values(0)));
  const double tr = op.trace().real();
  if (std::abs(tr - 1.0) > 1e-10)
    throw ContractViolation(std::string(what) + ": trace " + std::to_string(tr) + " differs from 1");
}

QuantumState QuantumState::from(const LabeledOperator& op, double rank_tolerance) {
  require_state(op);
  Mat m = hermitian_part(op.mat());
  const Eigensystem es = eigh(m);
  const bool clip = es.values(0) < 0.0 || (rank_tolerance > 0.0 && es.values(0) < rank_tolerance);
  if (clip) {
    m = apply_spectral(es, [rank_tolerance](double x) { return x < std::max(rank_tolerance, 0.0) ? 0.0 : x; });
    m /= m.trace().real();
  }
  return QuantumState(LabeledOperator(op.layout(), m), rank_tolerance);
}

}  // namespace entlab
