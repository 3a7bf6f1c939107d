#include "entlab/entropy.hpp"

#include <cmath>
#include <limits>

#include "entlab/linop.hpp"

namespace entlab {

namespace {

LabelSet join(std::initializer_list<const LabelSet*> sets) {
  LabelSet out;
  for (const auto* s : sets) out.insert(out.end(), s->begin(), s->end());
  return out;
}

double h(const LabeledOperator& rho, const LabelSet& s) { return s.empty() ? 0.0 : vn_entropy(rho, s); }

}  // namespace

double entropy_of(const Mat& rho) {
  const Eigensystem es = eigh(rho);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < es.dim(); ++i) {
    const double x = es.values(i);
    if (x > 0.0) acc -= x * std::log(x);
  }
  return acc;
}

double vn_entropy(const LabeledOperator& rho, const LabelSet& subsystems) {
  return entropy_of(marginal(rho, subsystems).mat());
}

DivergenceValue umegaki(const Mat& rho, const Mat& sigma) {
  const Eigensystem er = eigh(rho);
  const Eigensystem es = eigh(sigma);
  const double cut = es.support_cutoff();
  // Weight of ρ outside supp σ.
  double outside = 0.0;
  for (Eigen::Index i = 0; i < es.dim(); ++i)
    if (es.values(i) <= cut) outside += (es.vectors.col(i).adjoint() * rho * es.vectors.col(i))(0, 0).real();
  if (outside > 1e-12 * std::max(1.0, rho.trace().real()))
    return {std::numeric_limits<double>::infinity(), false};
  double acc = 0.0;
  for (Eigen::Index i = 0; i < er.dim(); ++i) {
    const double x = er.values(i);
    if (x > 0.0) acc += x * std::log(x);
  }
  acc -= (rho * log_on_support(es)).trace().real();
  return {acc, true};
}

DivergenceValue umegaki(const LabeledOperator& rho, const LabeledOperator& sigma) {
  if (!(rho.layout() == sigma.layout())) throw LayoutError("umegaki: layout mismatch");
  return umegaki(rho.mat(), sigma.mat());
}

double cqmi(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b, const LabelSet& c) {
  require_partition(rho.layout(), {a, b, c}, false);
  return h(rho, join({&a, &c})) + h(rho, join({&b, &c})) - h(rho, c) - h(rho, join({&a, &b, &c}));
}

double mutual_info(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b) {
  require_partition(rho.layout(), {a, b}, false);
  return h(rho, a) + h(rho, b) - h(rho, join({&a, &b}));
}

double tripartite_mi(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b, const LabelSet& c) {
  require_partition(rho.layout(), {a, b, c}, false);
  return h(rho, a) + h(rho, b) + h(rho, c) - h(rho, join({&a, &b, &c}));
}

double cemi_term(const LabeledOperator& rho, const LabelSet& a, const LabelSet& abar, const LabelSet& b,
                 const LabelSet& bbar) {
  require_partition(rho.layout(), {a, abar, b, bbar}, false);
  return mutual_info(rho, join({&a, &abar}), join({&b, &bbar})) - mutual_info(rho, abar, bbar);
}

double cemi_term3(const LabeledOperator& rho, const LabelSet& a, const LabelSet& abar, const LabelSet& b,
                  const LabelSet& bbar, const LabelSet& c, const LabelSet& cbar) {
  require_partition(rho.layout(), {a, abar, b, bbar, c, cbar}, false);
  return tripartite_mi(rho, join({&a, &abar}), join({&b, &bbar}), join({&c, &cbar})) -
         tripartite_mi(rho, abar, bbar, cbar);
}

double tripartite_cqmi(const LabeledOperator& rho, const LabelSet& a1, const LabelSet& a2, const LabelSet& a3,
                       const LabelSet& c) {
  require_partition(rho.layout(), {a1, a2, a3, c}, false);
  return cqmi(rho, a1, a2, c) + cqmi(rho, join({&a1, &a2}), a3, c);
}

namespace {

// log on the support after merging eigenvalues closer than rel_gap·λ_max.
Mat clustered_log(const Mat& m, double rel_gap) {
  Eigensystem es = eigh(m);
  const Eigen::Index n = es.dim();
  const double scale = std::max(es.max_abs_value(), 1e-300);
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (i == n || es.values(i) - es.values(i - 1) > rel_gap * scale) {
      const double mean = es.values.segment(start, i - start).mean();
      es.values.segment(start, i - start).setConstant(mean);
      start = i;
    }
  }
  return log_on_support(es);
}

}  // namespace

ExpStateForm exp_state_form(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b,
                            const LabelSet& c) {
  require_partition(rho.layout(), {a, b, c}, false);
  const LabelSet abc = join({&a, &b, &c});
  const LabeledOperator r = marginal(rho, abc);
  const SystemLayout& l = r.layout();
  const LabeledOperator rc = marginal(r, c);
  const Eigensystem ec = eigh(rc.mat());
  if (ec.values(0) <= ec.support_cutoff())
    throw DomainError("exp_state_form: rho_C is rank deficient");
  constexpr double gap = 1e-9;
  const LabeledOperator rac = marginal(r, join({&a, &c}));
  const LabeledOperator rbc = marginal(r, join({&b, &c}));
  const Mat log_sum = embed_mat(LabeledOperator(rac.layout(), clustered_log(rac.mat(), gap)), l) +
                      embed_mat(LabeledOperator(rbc.layout(), clustered_log(rbc.mat(), gap)), l) -
                      embed_mat(LabeledOperator(rc.layout(), clustered_log(rc.mat(), gap)), l);
  LabeledOperator op(l, exp_hermitian(log_sum));
  const DivergenceValue dv = umegaki(r.mat(), op.mat());
  return {std::move(op), dv.value};
}

ClassicalIdentities classical_identities(const Pmf3& pmf) {
  const int nx = pmf.nx, ny = pmf.ny, nz = pmf.nz;
  if (static_cast<int>(pmf.p.size()) != nx * ny * nz) throw ParameterError("classical_identities: size mismatch");
  double total = 0.0;
  for (double v : pmf.p) {
    if (v < 0.0) throw ParameterError("classical_identities: negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("classical_identities: probabilities do not sum to 1");
  std::vector<double> pz(nz, 0.0), pxz(nx * nz, 0.0), pyz(ny * nz, 0.0);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y)
      for (int z = 0; z < nz; ++z) {
        const double v = pmf(x, y, z);
        pz[z] += v;
        pxz[x * nz + z] += v;
        pyz[y * nz + z] += v;
      }
  auto ent = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v)
      if (x > 0.0) acc -= x * std::log(x);
    return acc;
  };
  ClassicalIdentities out;
  out.cmi = ent(pxz) + ent(pyz) - ent(pz) - ent(pmf.p);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y)
      for (int z = 0; z < nz; ++z) {
        const double v = pmf(x, y, z);
        if (v <= 0.0) continue;  // supp P ⊆ supp P_Z, so conditionals below are defined
        const double y_given_z = pyz[y * nz + z] / pz[z];
        const double q_rec = y_given_z * pxz[x * nz + z];
        const double x_given_z = pxz[x * nz + z] / pz[z];
        const double q_markov = pz[z] * x_given_z * y_given_z;
        out.recovery += v * (std::log(v) - std::log(q_rec));
        out.markov += v * (std::log(v) - std::log(q_markov));
      }
  out.max_deviation = std::max(std::abs(out.cmi - out.recovery), std::abs(out.cmi - out.markov));
  return out;
}

namespace {

void check_blocks(const std::vector<MarkovBlock>& blocks, int dim_a, int dim_b) {
  if (blocks.empty()) throw ParameterError("markov_state: no blocks");
  double total = 0.0;
  for (const auto& blk : blocks) {
    if (blk.weight < 0.0) throw ParameterError("markov_state: negative block weight");
    total += blk.weight;
    if (blk.dim_left < 1 || blk.dim_right < 1) throw ParameterError("markov_state: block dimensions must be positive");
    if (blk.left.rows() != dim_a * blk.dim_left || blk.left.cols() != blk.left.rows())
      throw ParameterError("markov_state: left factor size inconsistent with dim_a·dim_left");
    if (blk.right.rows() != blk.dim_right * dim_b || blk.right.cols() != blk.right.rows())
      throw ParameterError("markov_state: right factor size inconsistent with dim_right·dim_b");
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("markov_state: block weights do not sum to 1");
}

}  // namespace

QuantumState markov_state(const std::vector<MarkovBlock>& blocks, const Label& a, int dim_a, const Label& c,
                          const Label& b, int dim_b) {
  check_blocks(blocks, dim_a, dim_b);
  int dim_c = 0;
  for (const auto& blk : blocks) dim_c += blk.dim_left * blk.dim_right;
  const int d = dim_a * dim_c * dim_b;
  Mat out = Mat::Zero(d, d);
  auto index = [&](int x, int cc, int y) { return (x * dim_c + cc) * dim_b + y; };
  int offset = 0;
  for (const auto& blk : blocks) {
    const int dl = blk.dim_left, dr = blk.dim_right;
    for (int x = 0; x < dim_a; ++x)
      for (int l = 0; l < dl; ++l)
        for (int x2 = 0; x2 < dim_a; ++x2)
          for (int l2 = 0; l2 < dl; ++l2) {
            const Complex lv = blk.left(x * dl + l, x2 * dl + l2);
            if (lv == Complex(0.0)) continue;
            for (int r = 0; r < dr; ++r)
              for (int y = 0; y < dim_b; ++y)
                for (int r2 = 0; r2 < dr; ++r2)
                  for (int y2 = 0; y2 < dim_b; ++y2)
                    out(index(x, offset + l * dr + r, y), index(x2, offset + l2 * dr + r2, y2)) +=
                        blk.weight * lv * blk.right(r * dim_b + y, r2 * dim_b + y2);
          }
    offset += dl * dr;
  }
  return QuantumState::from(SystemLayout({a, c, b}, {dim_a, dim_c, dim_b}), hermitian_part(out));
}

SeparableDecomposition markov_marginal_decomposition(const std::vector<MarkovBlock>& blocks, const Label& a,
                                                     int dim_a, const Label& b, int dim_b) {
  check_blocks(blocks, dim_a, dim_b);
  std::vector<double> weights;
  std::vector<std::vector<Mat>> factors;
  for (const auto& blk : blocks) {
    weights.push_back(blk.weight);
    factors.push_back({partial_trace_last(blk.left, dim_a, blk.dim_left),
                       partial_trace_first(blk.right, blk.dim_right, dim_b)});
  }
  return SeparableDecomposition::from_products(SystemLayout({a, b}, {dim_a, dim_b}), {{a}, {b}}, weights,
                                               factors);
}

}  // namespace entlab
