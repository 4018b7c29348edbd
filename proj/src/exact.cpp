#include "meanfield/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "meanfield/error.hpp"
#include "parallel.hpp"

namespace meanfield {

namespace {

constexpr std::size_t kBlock = 4096;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// A partial log-sum-exp: the value is top + ln(sum).
struct LogSum {
  double top = kNegInf;
  double sum = 0.0;

  double value() const { return top == kNegInf ? kNegInf : top + std::log(sum); }
};

LogSum combine(const LogSum& a, const LogSum& b) {
  if (a.top == kNegInf) return b;
  if (b.top == kNegInf) return a;
  const double top = std::max(a.top, b.top);
  return {top, a.sum * std::exp(a.top - top) + b.sum * std::exp(b.top - top)};
}

LogSum block_logsum(std::span<const double> v) {
  LogSum out;
  for (double x : v) out.top = std::max(out.top, x);
  if (out.top == kNegInf) return out;
  for (double x : v) out.sum += std::exp(x - out.top);
  return out;
}

LogSum reduce_tree(std::vector<LogSum> parts) {
  if (parts.empty()) return {};
  while (parts.size() > 1) {
    std::vector<LogSum> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(combine(parts[i], parts[i + 1]));
    if (parts.size() % 2 == 1) next.push_back(parts.back());
    parts = std::move(next);
  }
  return parts.front();
}

void require_binary(const ValidatedModel& model) {
  if (!model.binary())
    fail(ErrorCode::UnsupportedMeasure, "exact enumeration is implemented for +-1 spins");
}

void check_sizes(const ValidatedModel& model, const Sizes& sizes) {
  if (static_cast<int>(sizes.size()) != model.species())
    fail(ErrorCode::DimensionMismatch, "one size per species is required");
  long total = 0;
  for (int s : sizes) {
    if (s < 1) fail(ErrorCode::NonIntegerSize, "species sizes must be positive");
    total += s;
  }
  for (int l = 0; l < model.species(); ++l) {
    const double expected = model.alpha()[l] * static_cast<double>(total);
    if (std::abs(expected - sizes[l]) > 1e-9 * std::max(1.0, expected))
      fail(ErrorCode::NonIntegerSize, "species sizes are inconsistent with alpha");
  }
}

std::vector<double> log_binomial_row(int N) {
  std::vector<double> row(static_cast<std::size_t>(N) + 1);
  const double top = std::lgamma(N + 1.0);
  for (int k = 0; 2 * k <= N; ++k) {
    const double v = top - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0);
    row[k] = v;
    row[N - k] = v;
  }
  return row;
}

// Unnormalized log-weights of lattice points: the counting factor, the
// 2^{-N} prior and N g(m) written in the spin sums, (1/2N) S'JS + h'S.
class WeightKernel {
 public:
  WeightKernel(const ValidatedModel& model, const MagLattice& lattice)
      : model_(model), lattice_(lattice) {
    for (int s : lattice.sizes()) log_binom_.push_back(log_binomial_row(s));
    offset_ = -static_cast<double>(lattice.total()) * std::numbers::ln2;
  }

  // Fills out[i] for indices [begin, begin + out.size()).
  void fill(std::size_t begin, std::span<double> out) const {
    const int n = lattice_.species();
    std::vector<int> k = lattice_.counts(begin);
    std::vector<double> S(n);
    const double inv2N = 0.5 / static_cast<double>(lattice_.total());
    const Matrix& J = model_.J();
    const Vector& h = model_.h();
    for (std::size_t i = 0; i < out.size(); ++i) {
      double lw = offset_;
      for (int l = 0; l < n; ++l) {
        lw += log_binom_[l][k[l]];
        S[l] = 2.0 * k[l] - lattice_.sizes()[l];
      }
      double quad = 0.0;
      double lin = 0.0;
      for (int l = 0; l < n; ++l) {
        double row = 0.0;
        for (int s = 0; s < n; ++s) row += J(l, s) * S[s];
        quad += S[l] * row;
        lin += h[l] * S[l];
      }
      out[i] = lw + inv2N * quad + lin;
      for (int l = n - 1; l >= 0; --l) {
        if (++k[l] <= lattice_.sizes()[l]) break;
        k[l] = 0;
      }
    }
  }

 private:
  const ValidatedModel& model_;
  const MagLattice& lattice_;
  std::vector<std::vector<double>> log_binom_;
  double offset_ = 0.0;
};

MagLattice checked_lattice(const ValidatedModel& model, const Sizes& sizes, const ExactOptions& opts) {
  require_binary(model);
  check_sizes(model, sizes);
  double volume = 1.0;
  for (int s : sizes) volume *= s + 1.0;
  if (volume > static_cast<double>(opts.max_lattice))
    fail(ErrorCode::LatticeTooLarge, "lattice has " + std::to_string(volume) + " points, cap is " +
                                         std::to_string(opts.max_lattice));
  return MagLattice(sizes);
}

double signed_difference(double log_pos, double log_neg) {
  return std::exp(log_pos) - std::exp(log_neg);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

MagLattice::MagLattice(Sizes sizes) : sizes_(std::move(sizes)) {
  strides_.assign(sizes_.size(), 1);
  for (std::size_t l = sizes_.size(); l-- > 0;) {
    strides_[l] = volume_;
    volume_ *= static_cast<std::size_t>(sizes_[l]) + 1;
    total_ += sizes_[l];
  }
}

std::vector<int> MagLattice::counts(std::size_t index) const {
  std::vector<int> k(sizes_.size());
  for (std::size_t l = 0; l < sizes_.size(); ++l) {
    k[l] = static_cast<int>(index / strides_[l]);
    index %= strides_[l];
  }
  return k;
}

MagnetizationVector MagLattice::magnetization(std::size_t index) const {
  const std::vector<int> k = counts(index);
  MagnetizationVector m(species());
  for (int l = 0; l < species(); ++l) m[l] = (2.0 * k[l] - sizes_[l]) / sizes_[l];
  return m;
}

double tree_logsumexp(std::span<const double> values) {
  std::vector<LogSum> parts;
  for (std::size_t b = 0; b < values.size(); b += kBlock)
    parts.push_back(block_logsum(values.subspan(b, std::min(kBlock, values.size() - b))));
  return reduce_tree(std::move(parts)).value();
}

Sizes sizes_for_total(const ValidatedModel& model, long N) {
  if (N < 1) fail(ErrorCode::NonIntegerSize, "system size must be positive");
  Sizes sizes;
  for (int l = 0; l < model.species(); ++l) {
    const double v = model.alpha()[l] * static_cast<double>(N);
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9 * std::max(1.0, v) || r < 1.0)
      fail(ErrorCode::NonIntegerSize, "N * alpha_l is not a positive integer for N = " + std::to_string(N));
    sizes.push_back(static_cast<int>(r));
  }
  return sizes;
}

double log_count(int N_l, double m) {
  if (N_l < 1) fail(ErrorCode::OffLattice, "species size must be positive");
  const double up = N_l * (1.0 + m) / 2.0;
  const double k = std::round(up);
  if (std::abs(up - k) > 1e-9 || k < 0.0 || k > N_l)
    fail(ErrorCode::OffLattice, "magnetization is not a lattice value");
  return std::lgamma(N_l + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N_l - k + 1.0);
}

double log_partition(const ValidatedModel& model, const Sizes& sizes, const ExactOptions& opts) {
  const MagLattice lattice = checked_lattice(model, sizes, opts);
  const WeightKernel kernel(model, lattice);
  const std::size_t blocks = (lattice.volume() + kBlock - 1) / kBlock;
  std::vector<LogSum> parts(blocks);
  detail::parallel_for(blocks, opts.threads, [&](std::size_t b) {
    const std::size_t begin = b * kBlock;
    std::vector<double> buf(std::min(kBlock, lattice.volume() - begin));
    kernel.fill(begin, buf);
    parts[b] = block_logsum(buf);
  });
  return reduce_tree(std::move(parts)).value();
}

double finite_pressure(const ValidatedModel& model, const Sizes& sizes, const ExactOptions& opts) {
  const double lz = log_partition(model, sizes, opts);
  long N = 0;
  for (int s : sizes) N += s;
  return lz / static_cast<double>(N);
}

MagnetizationLaw magnetization_law(const ValidatedModel& model, const Sizes& sizes,
                                   const ExactOptions& opts) {
  MagnetizationLaw law{checked_lattice(model, sizes, opts), {}};
  const WeightKernel kernel(model, law.lattice);
  law.log_weights.resize(law.lattice.volume());
  const std::size_t blocks = (law.lattice.volume() + kBlock - 1) / kBlock;
  detail::parallel_for(blocks, opts.threads, [&](std::size_t b) {
    const std::size_t begin = b * kBlock;
    const std::size_t len = std::min(kBlock, law.lattice.volume() - begin);
    kernel.fill(begin, std::span<double>(law.log_weights.data() + begin, len));
  });
  const double lz = tree_logsumexp(law.log_weights);
  for (double& w : law.log_weights) w -= lz;
  return law;
}

ExactMoments exact_moments(const MagnetizationLaw& law) {
  const MagLattice& lat = law.lattice;
  const int n = lat.species();
  const std::size_t V = lat.volume();
  ExactMoments out;
  out.sizes = lat.sizes();
  out.mean = Vector::Zero(n);
  out.second = Matrix::Zero(n, n);

  std::vector<Vector> mags(V);
  for (std::size_t i = 0; i < V; ++i) mags[i] = lat.magnetization(i);

  // First moments: positive terms and their mirror images, accumulated in
  // the same order so that symmetric laws give an exact zero.
  for (int l = 0; l < n; ++l) {
    std::vector<double> pos;
    std::vector<double> neg;
    for (std::size_t i = 0; i < V; ++i) {
      if (mags[i][l] <= 0.0) continue;
      const std::size_t j = lat.mirror(i);
      pos.push_back(law.log_weights[i] + std::log(mags[i][l]));
      neg.push_back(law.log_weights[j] + std::log(-mags[j][l]));
    }
    out.mean[l] = signed_difference(tree_logsumexp(pos), tree_logsumexp(neg));
  }
  for (int l = 0; l < n; ++l) {
    for (int s = l; s < n; ++s) {
      std::vector<double> pos;
      std::vector<double> neg;
      for (std::size_t i = 0; i < V; ++i) {
        const double prod = mags[i][l] * mags[i][s];
        if (prod > 0.0) pos.push_back(law.log_weights[i] + std::log(prod));
        if (prod < 0.0) neg.push_back(law.log_weights[i] + std::log(-prod));
      }
      const double v = signed_difference(tree_logsumexp(pos), tree_logsumexp(neg));
      out.second(l, s) = v;
      out.second(s, l) = v;
    }
  }
  return out;
}

ExactMoments exact_moments(const ValidatedModel& model, const Sizes& sizes, const ExactOptions& opts) {
  return exact_moments(magnetization_law(model, sizes, opts));
}

SampleSet exact_sample(const ValidatedModel& model, const Sizes& sizes, std::size_t M,
                       std::uint64_t seed, const ExactOptions& opts) {
  SampleSet out;
  out.n = model.species();
  out.sizes = sizes;
  out.seed = seed;
  const MagnetizationLaw law = magnetization_law(model, sizes, opts);
  if (M == 0) return out;

  const std::size_t V = law.lattice.volume();
  std::vector<double> cdf(V);
  double run = 0.0;
  for (std::size_t i = 0; i < V; ++i) {
    run += std::exp(law.log_weights[i]);
    cdf[i] = run;
  }
  const double total = run;
  const int n = out.n;
  out.sums.resize(M * static_cast<std::size_t>(n));

  const std::size_t blocks = (M + kBlock - 1) / kBlock;
  detail::parallel_for(blocks, opts.threads, [&](std::size_t b) {
    std::mt19937_64 gen(splitmix64(seed ^ splitmix64(b)));
    const std::size_t end = std::min(M, (b + 1) * kBlock);
    for (std::size_t d = b * kBlock; d < end; ++d) {
      const double u = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u * total);
      const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), V - 1);
      const std::vector<int> k = law.lattice.counts(idx);
      for (int l = 0; l < n; ++l)
        out.sums[d * n + l] = 2 * static_cast<std::int64_t>(k[l]) - sizes[l];
    }
  });
  return out;
}

Configuration configuration_from_sums(const Sizes& sizes, std::span<const std::int64_t> sums) {
  if (sums.size() != sizes.size())
    fail(ErrorCode::DimensionMismatch, "one sum per species is required");
  Configuration c;
  c.partition = sizes;
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    const std::int64_t up2 = sizes[l] + sums[l];
    if (up2 < 0 || up2 > 2 * static_cast<std::int64_t>(sizes[l]) || up2 % 2 != 0)
      fail(ErrorCode::OffLattice, "spin sum is not attainable");
    const std::int64_t up = up2 / 2;
    for (std::int64_t i = 0; i < sizes[l]; ++i) c.spins.push_back(i < up ? 1.0 : -1.0);
  }
  return c;
}

Vector DiscreteLaw::point(std::size_t i) const {
  return Eigen::Map<const Vector>(points.data() + i * static_cast<std::size_t>(dim), dim);
}

Vector DiscreteLaw::mean() const {
  Vector m = Vector::Zero(dim);
  for (std::size_t i = 0; i < size(); ++i) m += probs[i] * point(i);
  return m;
}

Matrix DiscreteLaw::covariance() const {
  const Vector mu = mean();
  Matrix c = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < size(); ++i) {
    const Vector d = point(i) - mu;
    c += probs[i] * d * d.transpose();
  }
  return c;
}

DiscreteLaw DiscreteLaw::marginal(int component) const {
  if (component < 0 || component >= dim) fail(ErrorCode::DimensionMismatch, "no such component");
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(size());
  for (std::size_t i = 0; i < size(); ++i)
    atoms.emplace_back(points[i * static_cast<std::size_t>(dim) + component], probs[i]);
  std::sort(atoms.begin(), atoms.end());
  DiscreteLaw out;
  out.dim = 1;
  for (const auto& [x, p] : atoms) {
    if (!out.points.empty() && out.points.back() == x) {
      out.probs.back() += p;
    } else {
      out.points.push_back(x);
      out.probs.push_back(p);
    }
  }
  return out;
}

DiscreteLaw normalized_sum_law(const ValidatedModel& model, const Sizes& sizes,
                               const MagnetizationVector& centre, int k,
                               std::optional<double> condition_radius, const ExactOptions& opts) {
  if (k < 1) fail(ErrorCode::DomainError, "type k must be positive");
  if (centre.size() != model.species())
    fail(ErrorCode::DimensionMismatch, "centre dimension must equal the species count");
  const MagnetizationLaw law = magnetization_law(model, sizes, opts);
  const MagLattice& lat = law.lattice;
  const int n = lat.species();
  const double exponent = 1.0 - 1.0 / (2.0 * k);

  std::vector<std::size_t> kept;
  std::vector<double> kept_lw;
  for (std::size_t i = 0; i < lat.volume(); ++i) {
    if (condition_radius) {
      if ((lat.magnetization(i) - centre).norm() > *condition_radius) continue;
    }
    kept.push_back(i);
    kept_lw.push_back(law.log_weights[i]);
  }
  const double lz = tree_logsumexp(kept_lw);
  if (kept.empty() || !std::isfinite(lz))
    fail(ErrorCode::EmptyCondition, "conditioning ball carries no lattice mass");

  DiscreteLaw out;
  out.dim = n;
  out.points.reserve(kept.size() * n);
  out.probs.reserve(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const std::vector<int> cnt = lat.counts(kept[j]);
    for (int l = 0; l < n; ++l) {
      const double Nl = sizes[l];
      const double S = 2.0 * cnt[l] - Nl;
      out.points.push_back((S - Nl * centre[l]) / std::pow(Nl, exponent));
    }
    out.probs.push_back(std::exp(kept_lw[j] - lz));
  }
  return out;
}

}  // namespace meanfield
