#include "entlab/linop.hpp"

#include <algorithm>

namespace entlab {

namespace {

std::vector<int> strides_of(const std::vector<int>& dims) {
  std::vector<int> s(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * dims[i + 1];
  return s;
}

// new_index[i] = index of basis vector i after moving factor order[k] to slot k.
std::vector<int> permutation_map(const std::vector<int>& dims, const std::vector<int>& order) {
  const int n = static_cast<int>(dims.size());
  std::vector<int> new_dims(n);
  for (int k = 0; k < n; ++k) new_dims[k] = dims[order[k]];
  const auto old_strides = strides_of(dims);
  const auto new_strides = strides_of(new_dims);
  int total = 1;
  for (int d : dims) total *= d;
  std::vector<int> map(total);
  for (int i = 0; i < total; ++i) {
    int j = 0;
    for (int k = 0; k < n; ++k) {
      const int digit = (i / old_strides[order[k]]) % dims[order[k]];
      j += digit * new_strides[k];
    }
    map[i] = j;
  }
  return map;
}

std::vector<int> positions(const SystemLayout& layout, const LabelSet& labels) {
  std::vector<int> out;
  for (const auto& l : labels) out.push_back(static_cast<int>(layout.index_of(l)));
  return out;
}

}  // namespace

Mat permute_systems(const Mat& m, const std::vector<int>& dims, const std::vector<int>& order) {
  bool trivial = true;
  for (std::size_t k = 0; k < order.size(); ++k) trivial = trivial && order[k] == static_cast<int>(k);
  if (trivial) return m;
  const auto map = permutation_map(dims, order);
  const int total = static_cast<int>(map.size());
  Mat out(total, total);
  for (int j = 0; j < total; ++j)
    for (int i = 0; i < total; ++i) out(map[i], map[j]) = m(i, j);
  return out;
}

Mat partial_trace_last(const Mat& m, int keep_dim, int drop_dim) {
  Mat out = Mat::Zero(keep_dim, keep_dim);
  for (int k = 0; k < drop_dim; ++k)
    for (int j = 0; j < keep_dim; ++j)
      for (int i = 0; i < keep_dim; ++i) out(i, j) += m(i * drop_dim + k, j * drop_dim + k);
  return out;
}

Mat partial_trace_first(const Mat& m, int drop_dim, int keep_dim) {
  Mat out = Mat::Zero(keep_dim, keep_dim);
  for (int k = 0; k < drop_dim; ++k) out += m.block(k * keep_dim, k * keep_dim, keep_dim, keep_dim);
  return out;
}

LabeledOperator tensor(const LabeledOperator& a, const LabeledOperator& b) {
  return {a.layout().concat(b.layout()), kron(a.mat(), b.mat())};
}

LabeledOperator reorder(const LabeledOperator& x, const LabelSet& order) {
  const SystemLayout& l = x.layout();
  if (order.size() != l.size()) throw LayoutError("reorder: label count mismatch");
  require_labels(l, order);
  const auto pos = positions(l, order);
  std::vector<int> dims;
  for (int p : pos) dims.push_back(l.dims()[p]);
  return {SystemLayout(order, dims), permute_systems(x.mat(), l.dims(), pos)};
}

LabeledOperator partial_trace(const LabeledOperator& x, const LabelSet& drop) {
  const SystemLayout& l = x.layout();
  require_labels(l, drop);
  if (drop.empty()) return x;
  LabelSet keep = l.complement(drop);
  LabelSet order = keep;
  order.insert(order.end(), drop.begin(), drop.end());
  const LabeledOperator moved = reorder(x, order);
  const int dk = l.dim_of(keep), dd = l.dim_of(drop);
  return {l.restricted_to(keep), partial_trace_last(moved.mat(), dk, dd)};
}

LabeledOperator marginal(const LabeledOperator& x, const LabelSet& keep) {
  require_labels(x.layout(), keep);
  return partial_trace(x, x.layout().complement(keep));
}

Mat partial_transpose_mat(const Mat& m, const std::vector<int>& dims, const std::vector<int>& systems) {
  const auto strides = strides_of(dims);
  const int total = static_cast<int>(m.rows());
  Mat out(total, total);
  for (int j = 0; j < total; ++j) {
    for (int i = 0; i < total; ++i) {
      int ii = i, jj = j;
      for (int p : systems) {
        const int di = (i / strides[p]) % dims[p];
        const int dj = (j / strides[p]) % dims[p];
        ii += (dj - di) * strides[p];
        jj += (di - dj) * strides[p];
      }
      out(ii, jj) = m(i, j);
    }
  }
  return out;
}

LabeledOperator partial_transpose(const LabeledOperator& x, const LabelSet& on) {
  const SystemLayout& l = x.layout();
  require_labels(l, on);
  return {l, partial_transpose_mat(x.mat(), l.dims(), positions(l, on))};
}

Mat embed_mat(const LabeledOperator& x, const SystemLayout& target) {
  const SystemLayout& l = x.layout();
  for (std::size_t i = 0; i < l.size(); ++i)
    if (target.dim_of(l.labels()[i]) != l.dims()[i])
      throw LayoutError("embed: dimension mismatch for label '" + l.labels()[i] + "'");
  const LabelSet rest = target.complement(l.labels());
  const int dr = target.dim_of(rest);
  Mat big = kron(x.mat(), Mat::Identity(dr, dr));
  if (l.size() + rest.size() != target.size()) throw LayoutError("embed: label mismatch");
  // Current factor order: x labels then rest; permute into target order.
  LabelSet current = l.labels();
  current.insert(current.end(), rest.begin(), rest.end());
  std::vector<int> dims;
  for (const auto& c : current) dims.push_back(target.dim_of(c));
  std::vector<int> order;
  for (const auto& t : target.labels())
    order.push_back(static_cast<int>(std::find(current.begin(), current.end(), t) - current.begin()));
  return permute_systems(big, dims, order);
}

LabeledOperator embed(const LabeledOperator& x, const SystemLayout& target) {
  return {target, embed_mat(x, target)};
}

Spectrum spectral(const LabeledOperator& x) {
  if (!x.hermitian()) throw ContractViolation("spectral: operator is not Hermitian");
  Eigensystem es = eigh(x.mat());
  return {std::move(es.values), std::move(es.vectors)};
}

LabeledOperator matfun(const LabeledOperator& x, MatFun f, Complex z) {
  if (!x.hermitian()) throw ContractViolation("matfun: operator is not Hermitian");
  const Eigensystem es = eigh(x.mat());
  switch (f) {
    case MatFun::Log:
      return {x.layout(), log_on_support(es)};
    case MatFun::Exp:
      return {x.layout(), apply_spectral(es, [](double v) { return std::exp(v); })};
    case MatFun::Power:
      return {x.layout(), power_on_support(es, z)};
  }
  throw ContractViolation("matfun: unknown function");
}

Mat pinch(const Mat& x, const Mat& basis_of, double rel_gap) {
  if (x.rows() != basis_of.rows() || x.cols() != basis_of.cols())
    throw LayoutError("pinch: shape mismatch");
  Mat out = Mat::Zero(x.rows(), x.cols());
  for (const Mat& p : spectral_projectors(eigh(basis_of), rel_gap)) out += p * x * p;
  return out;
}

LabeledOperator pinch(const LabeledOperator& x, const LabeledOperator& basis_of, double rel_gap) {
  if (!(x.layout() == basis_of.layout())) throw LayoutError("pinch: layout mismatch");
  return {x.layout(), pinch(x.mat(), basis_of.mat(), rel_gap)};
}

int distinct_eigenvalues(const LabeledOperator& x, double rel_gap) {
  return count_distinct(spectral(x).values, rel_gap);
}

LabeledOperator tensor_power(const LabeledOperator& x, int n) {
  if (n < 1) throw ParameterError("tensor_power: n must be positive");
  auto relabel = [&](int copy) {
    LabelSet labels;
    for (const auto& l : x.layout().labels()) labels.push_back(l + std::to_string(copy));
    return LabeledOperator(SystemLayout(labels, x.layout().dims()), x.mat());
  };
  LabeledOperator out = relabel(1);
  for (int k = 2; k <= n; ++k) out = tensor(out, relabel(k));
  return out;
}

LabeledOperator identity(const SystemLayout& layout) {
  const int d = layout.total_dim();
  return {layout, Mat::Identity(d, d)};
}

}  // namespace entlab
