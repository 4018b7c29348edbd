// Exact finite-N computations by enumeration over the magnetization
// lattice. Everything here is exact up to floating-point rounding and
// serves as the reference oracle for the asymptotic modules.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "meanfield/model.hpp"

namespace meanfield {

/// Species sizes N_l of a finite system.
using Sizes = std::vector<int>;

/// The product lattice of attainable magnetizations, {-1, -1 + 2/N_l, ..., 1}
/// per species. Points are indexed in mixed radix with the last species
/// varying fastest; the coordinate stored per axis is the up-spin count k_l.
class MagLattice {
 public:
  explicit MagLattice(Sizes sizes);

  const Sizes& sizes() const { return sizes_; }
  int species() const { return static_cast<int>(sizes_.size()); }
  long total() const { return total_; }
  std::size_t volume() const { return volume_; }

  /// Up-spin counts of the point with the given index.
  std::vector<int> counts(std::size_t index) const;
  /// Index of the point with all magnetizations negated.
  std::size_t mirror(std::size_t index) const { return volume_ - 1 - index; }
  MagnetizationVector magnetization(std::size_t index) const;

 private:
  Sizes sizes_;
  std::vector<std::size_t> strides_;
  std::size_t volume_ = 1;
  long total_ = 0;
};

struct ExactOptions {
  std::size_t max_lattice = 100'000'000;
  int threads = 1;
};

/// Sizes N_l = N alpha_l; errors with NonIntegerSize if any is fractional.
Sizes sizes_for_total(const ValidatedModel& model, long N);

/// ln binomial(N_l, N_l (1 + m) / 2), via log-Gamma.
double log_count(int N_l, double m);

/// ln Z_N under the 2^{-N} normalization of the +-1 product measure.
double log_partition(const ValidatedModel& model, const Sizes& sizes, const ExactOptions& opts = {});

/// p_N = ln Z_N / N.
double finite_pressure(const ValidatedModel& model, const Sizes& sizes, const ExactOptions& opts = {});

/// Gibbs law of the magnetization vector, as normalized log-probabilities
/// over the lattice.
struct MagnetizationLaw {
  MagLattice lattice;
  std::vector<double> log_weights;
};

MagnetizationLaw magnetization_law(const ValidatedModel& model, const Sizes& sizes,
                                   const ExactOptions& opts = {});

struct ExactMoments {
  Vector mean;    ///< <m_l>
  Matrix second;  ///< <m_l m_s>
  Sizes sizes;
};

ExactMoments exact_moments(const MagnetizationLaw& law);
ExactMoments exact_moments(const ValidatedModel& model, const Sizes& sizes,
                           const ExactOptions& opts = {});

/// Draws of the per-species spin sums S_l = N_l m_l.
struct SampleSet {
  int n = 0;
  Sizes sizes;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> sums;  ///< row-major, n entries per draw

  std::size_t count() const { return n == 0 ? 0 : sums.size() / static_cast<std::size_t>(n); }
  std::span<const std::int64_t> row(std::size_t i) const {
    return {sums.data() + i * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
  }
};

/// Identifier of the random stream construction used by exact_sample.
inline constexpr const char* kSamplerRng = "mt19937_64+splitmix64/v1";

/// M i.i.d. draws from the exact Gibbs law by inverse CDF over the lattice.
/// Draws are generated in blocks, each with its own stream derived from
/// (seed, block index), so output is independent of the thread count.
SampleSet exact_sample(const ValidatedModel& model, const Sizes& sizes, std::size_t M,
                       std::uint64_t seed, const ExactOptions& opts = {});

/// Spin configuration with the given per-species sums (up spins first in
/// each block). Used only for brute-force cross checks.
Configuration configuration_from_sums(const Sizes& sizes, std::span<const std::int64_t> sums);

/// Finitely supported law on R^dim.
struct DiscreteLaw {
  int dim = 0;
  std::vector<double> points;  ///< row-major, dim entries per atom
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  Vector point(std::size_t i) const;
  Vector mean() const;
  Matrix covariance() const;
  /// One-dimensional marginal, atoms sorted ascending.
  DiscreteLaw marginal(int component) const;
};

/// Exact law of ((S_l - N_l c_l) / N_l^{1 - 1/(2k)})_l, optionally conditioned
/// on the magnetization lying in the closed Euclidean ball B(centre, radius).
DiscreteLaw normalized_sum_law(const ValidatedModel& model, const Sizes& sizes,
                               const MagnetizationVector& centre, int k,
                               std::optional<double> condition_radius = std::nullopt,
                               const ExactOptions& opts = {});

/// Numerically stable ln sum exp over a fixed pairwise tree of blocks.
double tree_logsumexp(std::span<const double> values);

}  // namespace meanfield
