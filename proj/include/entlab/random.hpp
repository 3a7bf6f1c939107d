#pragma once

// Seeded samplers. Every sampler is a pure function of its arguments and the
// generator state; generators are derived from (seed, tag) so that callers
// can split streams without depending on scheduling.

#include <cstdint>
#include <random>
#include <string_view>

#include "entlab/layout.hpp"
#include "entlab/separable.hpp"

namespace entlab {

std::uint64_t splitmix64(std::uint64_t x);
/// Stream seed for (seed, tag); distinct tags give independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);
std::uint64_t tag_of(std::string_view name);

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t tag = 0) : engine_(derive_seed(seed, tag)) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  /// Standard complex Gaussian, E|z|² = 1.
  Complex complex_normal() {
    const double re = normal(), im = normal();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
  }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline constexpr double kFloorMixing = 1e-6;

CVec random_unit_vector(int d, Rng& rng);
/// First d_in columns of a Haar unitary on d_out ≥ d_in.
Mat random_isometry(int d_in, int d_out, Rng& rng);

/// Ginibre-induced state GG†/tr with G of size D×rank (rank 0 = full). The
/// result is mixed as (1−floor)ρ + floor·π.
QuantumState ginibre_state(const SystemLayout& layout, Rng& rng, int rank = 0,
                           double floor = kFloorMixing);
QuantumState haar_pure(const SystemLayout& layout, Rng& rng);
/// K-term mixture of Haar product states across `groups`, Dirichlet(1) weights.
SeparableDecomposition separable_mixture(const SystemLayout& layout,
                                         const std::vector<LabelSet>& groups, int terms, Rng& rng);
/// Ginibre state mixed with π just enough that the partial transpose on
/// `on` is positive semi-definite.
QuantumState ppt_state(const SystemLayout& layout, const LabelSet& on, Rng& rng);
/// scale·(G + G†)/(2√d) for complex Ginibre G.
Mat random_hermitian(int d, double scale, Rng& rng);
/// Purifies ρ and applies a random Stinespring channel to the purifying
/// system, landing on a new system `label` of dimension `dim`. dim = 1 gives ρ.
QuantumState extension_of(const QuantumState& rho, const Label& label, int dim, Rng& rng);

/// One-way LOCC operation Σ_k E_k ⊗ F_k on a two-label layout [a, b]:
/// instrument Kraus operators E_k on the first label and channels F_k on the
/// second (list of Kraus operators per k).
struct OneWayChannel {
  SystemLayout layout;
  std::vector<Mat> instrument;
  std::vector<std::vector<Mat>> channels;

  Mat apply(const Mat& rho) const;
  Mat adjoint(const Mat& effect) const;
  Mat instrument_adjoint(int k, const Mat& q_a) const;
  Mat channel_adjoint(int k, const Mat& q_b) const;
};

OneWayChannel one_way_locc_channel(const SystemLayout& layout, int outcomes, int kraus_per_channel,
                                   Rng& rng);

}  // namespace entlab
