#include "entlab/random.hpp"

#include <algorithm>
#include <cmath>

#include "entlab/linop.hpp"

namespace entlab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(splitmix64(seed) ^ (tag * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

std::uint64_t tag_of(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

CVec random_unit_vector(int d, Rng& rng) {
  CVec v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.complex_normal();
  return v / v.norm();
}

Mat random_isometry(int d_in, int d_out, Rng& rng) {
  if (d_out < d_in) throw ParameterError("random_isometry: output smaller than input");
  return random_unitary(d_out, rng).leftCols(d_in);
}

QuantumState ginibre_state(const SystemLayout& layout, Rng& rng, int rank, double floor) {
  const int d = layout.total_dim();
  if (rank < 0 || rank > d)
    throw ParameterError("ginibre_state: rank " + std::to_string(rank) + " outside [1, " + std::to_string(d) + "]");
  if (floor < 0.0 || floor > 1.0) throw ParameterError("ginibre_state: floor outside [0, 1]");
  const int r = rank == 0 ? d : rank;
  Mat g(d, r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = rng.complex_normal();
  Mat rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = (1.0 - floor) * rho + (floor / d) * Mat::Identity(d, d);
  return QuantumState::from(layout, hermitian_part(rho));
}

QuantumState haar_pure(const SystemLayout& layout, Rng& rng) {
  const CVec v = random_unit_vector(layout.total_dim(), rng);
  return QuantumState::from(layout, Mat(v * v.adjoint()));
}

SeparableDecomposition separable_mixture(const SystemLayout& layout, const std::vector<LabelSet>& groups,
                                         int terms, Rng& rng) {
  if (terms < 1) throw ParameterError("separable_mixture: need at least one term");
  require_partition(layout, groups, true);
  SeparableDecomposition out{layout, groups, {}, {}};
  double total = 0.0;
  for (int k = 0; k < terms; ++k) {
    const double w = -std::log(1.0 - rng.uniform());
    out.weights.push_back(w);
    total += w;
    std::vector<CVec> vs;
    for (const auto& g : groups) vs.push_back(random_unit_vector(layout.dim_of(g), rng));
    out.vectors.push_back(std::move(vs));
  }
  for (double& w : out.weights) w /= total;
  return out;
}

QuantumState ppt_state(const SystemLayout& layout, const LabelSet& on, Rng& rng) {
  const QuantumState base = ginibre_state(layout, rng);
  const int d = layout.total_dim();
  const double lam = min_eigenvalue(partial_transpose(base.op(), on).mat());
  if (lam >= 1e-12) return base;
  // (1−p)λ + p/d ≥ margin with a small positive margin.
  const double margin = 1e-9;
  const double p = std::min(1.0, (margin - lam) / (1.0 / d - lam));
  Mat rho = (1.0 - p) * base.mat() + (p / d) * Mat::Identity(d, d);
  return QuantumState::from(layout, rho);
}

Mat random_hermitian(int d, double scale, Rng& rng) {
  if (d < 1 || !(scale > 0.0)) throw ParameterError("random_hermitian: bad parameters");
  Mat g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = rng.complex_normal();
  return scale * (g + g.adjoint()) / (2.0 * std::sqrt(static_cast<double>(d)));
}

QuantumState extension_of(const QuantumState& rho, const Label& label, int dim, Rng& rng) {
  if (dim < 1) throw ParameterError("extension_of: dimension must be positive");
  const SystemLayout& l = rho.layout();
  const SystemLayout out_layout = l.concat(SystemLayout({label}, {dim}));
  if (dim == 1) return QuantumState::from(out_layout, rho.mat());
  const int d = l.total_dim();
  const Eigensystem es = eigh(rho.mat());
  // |ψ⟩ = Σ_i √λ_i |v_i⟩|i⟩_R with R of dimension d.
  Mat psi = Mat::Zero(d, d);  // psi(:, i) = √λ_i v_i, column index is R
  for (int i = 0; i < d; ++i) psi.col(i) = std::sqrt(std::max(es.values(i), 0.0)) * es.vectors.col(i);
  // Random channel R → C via a Stinespring isometry R → C ⊗ E.
  const int env_min = (d + dim - 1) / dim;
  const int env = rng.uniform_int(env_min, std::max(env_min, d));
  const Mat v = random_isometry(d, dim * env, rng);
  const int D = d * dim;
  Mat out = Mat::Zero(D, D);
  for (int e = 0; e < env; ++e) {
    Mat kraus(dim, d);  // rows c of isometry block (c, e)
    for (int c = 0; c < dim; ++c) kraus.row(c) = v.row(c * env + e);
    // (1 ⊗ K)|ψ⟩ as a d×dim matrix, vectorized row-major over (system, C).
    const Mat phi = psi * kraus.transpose();
    CVec vec(D);
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < dim; ++c) vec(a * dim + c) = phi(a, c);
    out.noalias() += vec * vec.adjoint();
  }
  out /= out.trace().real();
  return QuantumState::from(out_layout, hermitian_part(out));
}

Mat OneWayChannel::apply(const Mat& rho) const {
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  for (std::size_t k = 0; k < instrument.size(); ++k)
    for (const Mat& f : channels[k]) {
      const Mat g = kron(instrument[k], f);
      out.noalias() += g * rho * g.adjoint();
    }
  return out;
}

Mat OneWayChannel::adjoint(const Mat& effect) const {
  Mat out = Mat::Zero(effect.rows(), effect.cols());
  for (std::size_t k = 0; k < instrument.size(); ++k)
    for (const Mat& f : channels[k]) {
      const Mat g = kron(instrument[k], f);
      out.noalias() += g.adjoint() * effect * g;
    }
  return out;
}

Mat OneWayChannel::instrument_adjoint(int k, const Mat& q_a) const {
  return instrument[k].adjoint() * q_a * instrument[k];
}

Mat OneWayChannel::channel_adjoint(int k, const Mat& q_b) const {
  Mat out = Mat::Zero(q_b.rows(), q_b.cols());
  for (const Mat& f : channels[k]) out.noalias() += f.adjoint() * q_b * f;
  return out;
}

OneWayChannel one_way_locc_channel(const SystemLayout& layout, int outcomes, int kraus_per_channel, Rng& rng) {
  if (layout.size() != 2) throw LayoutError("one_way_locc_channel: need a two-label layout");
  if (outcomes < 1 || kraus_per_channel < 1) throw ParameterError("one_way_locc_channel: bad parameters");
  const int da = layout.dims()[0], db = layout.dims()[1];
  OneWayChannel ch{layout, {}, {}};
  const Mat va = random_isometry(da, da * outcomes, rng);
  for (int k = 0; k < outcomes; ++k) {
    ch.instrument.push_back(va.middleRows(k * da, da));
    const Mat vb = random_isometry(db, db * kraus_per_channel, rng);
    std::vector<Mat> kraus;
    for (int j = 0; j < kraus_per_channel; ++j) kraus.push_back(vb.middleRows(j * db, db));
    ch.channels.push_back(std::move(kraus));
  }
  return ch;
}

}  // namespace entlab
