#include "meanfield/inverse.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "meanfield/error.hpp"

namespace meanfield {

namespace {

constexpr double kSaturation = 1e-12;
constexpr double kVarianceFloor = 1e-15;
constexpr double kCondLimit = 1e10;

// Pairwise sum of f(i) for i in [lo, hi).
template <class F>
double pairwise(std::size_t lo, std::size_t hi, const F& f) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += f(i);
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise(lo, mid, f) + pairwise(mid, hi, f);
}

void check_rows(const SampleSet& s) {
  if (s.n < 1 || static_cast<int>(s.sizes.size()) != s.n || s.sums.size() % s.n != 0)
    fail(ErrorCode::InconsistentRows, "rows do not match the declared species count");
  for (int N : s.sizes)
    if (N < 1) fail(ErrorCode::InconsistentRows, "species sizes must be positive");
  for (std::size_t i = 0; i < s.count(); ++i) {
    const auto r = s.row(i);
    for (int l = 0; l < s.n; ++l) {
      const std::int64_t N = s.sizes[l];
      if (r[l] < -N || r[l] > N || (r[l] + N) % 2 != 0)
        fail(ErrorCode::InconsistentRows, "row " + std::to_string(i) + " is not an attainable spin sum");
    }
  }
}

void check_saturation(const Vector& mean) {
  for (Eigen::Index l = 0; l < mean.size(); ++l)
    if (!(std::abs(mean[l]) < 1.0 - kSaturation))
      fail(ErrorCode::MagnetizationSaturated, "|<m>| is too close to 1 for atanh");
}

double condition_number(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  const double lo = s[s.size() - 1];
  return lo == 0.0 ? std::numeric_limits<double>::infinity() : s[0] / lo;
}

InverseDiagnostics diagnose(const EmpiricalMoments& m, const Matrix& chi) {
  InverseDiagnostics d;
  d.chi_condition = condition_number(chi);
  d.min_variance = (m.second.diagonal() - m.mean.cwiseAbs2()).minCoeff();
  d.saturation_margin = 1.0 - m.mean.cwiseAbs().maxCoeff();
  d.rows_used = m.sample_count;
  return d;
}

SampleSet restrict_to_ball(const SampleSet& samples, const MagnetizationVector& centre, double radius) {
  check_rows(samples);
  if (centre.size() != samples.n) fail(ErrorCode::DimensionMismatch, "ball centre dimension differs from the sample");
  SampleSet out;
  out.n = samples.n;
  out.sizes = samples.sizes;
  out.seed = samples.seed;
  Vector m(samples.n);
  for (std::size_t i = 0; i < samples.count(); ++i) {
    const auto r = samples.row(i);
    for (int l = 0; l < samples.n; ++l) m[l] = static_cast<double>(r[l]) / samples.sizes[l];
    if ((m - centre).norm() <= radius) out.sums.insert(out.sums.end(), r.begin(), r.end());
  }
  if (out.count() < 2) fail(ErrorCode::EmptyCondition, "fewer than two draws inside the ball");
  return out;
}

}  // namespace

EmpiricalMoments EmpiricalMoments::from_exact(const ExactMoments& exact) {
  return {exact.mean, exact.second, exact.sizes, 0};
}

EmpiricalMoments estimate_moments(const SampleSet& samples) {
  check_rows(samples);
  if (samples.count() < 2) fail(ErrorCode::EmptySample, "at least two draws are required");
  const int n = samples.n;
  const std::size_t M = samples.count();
  auto m = [&](std::size_t i, int l) {
    return static_cast<double>(samples.sums[i * n + l]) / samples.sizes[l];
  };
  EmpiricalMoments out;
  out.sizes = samples.sizes;
  out.sample_count = M;
  out.mean.resize(n);
  out.second.resize(n, n);
  for (int l = 0; l < n; ++l) {
    out.mean[l] = pairwise(0, M, [&](std::size_t i) { return m(i, l); }) / static_cast<double>(M);
    for (int s = 0; s <= l; ++s) {
      const double v = pairwise(0, M, [&](std::size_t i) { return m(i, l) * m(i, s); }) / static_cast<double>(M);
      out.second(l, s) = v;
      out.second(s, l) = v;
    }
  }
  return out;
}

Matrix empirical_susceptibility(const EmpiricalMoments& moments) {
  const Eigen::Index n = moments.mean.size();
  if (moments.second.rows() != n || moments.second.cols() != n ||
      static_cast<Eigen::Index>(moments.sizes.size()) != n)
    fail(ErrorCode::DimensionMismatch, "moment dimensions disagree");
  const Matrix cov = moments.second - moments.mean * moments.mean.transpose();
  if (cov.cwiseAbs().maxCoeff() <= kVarianceFloor)
    fail(ErrorCode::ZeroVariance, "magnetizations do not fluctuate in the sample");
  Matrix chi(n, n);
  for (Eigen::Index l = 0; l < n; ++l)
    for (Eigen::Index s = 0; s < n; ++s) chi(l, s) = moments.sizes[s] * cov(l, s);
  return chi;
}

InverseEstimate invert_cw(const EmpiricalMoments& moments) {
  if (moments.mean.size() != 1) fail(ErrorCode::DimensionMismatch, "one species expected");
  const double m = moments.mean[0];
  if (!(std::abs(m) < 1.0 - kSaturation))
    fail(ErrorCode::MagnetizationSaturated, "|<m>| is too close to 1 for atanh");
  const double var = moments.second(0, 0) - m * m;
  if (!(var > kVarianceFloor)) fail(ErrorCode::ZeroVariance, "sample variance of m vanishes");
  const double N = moments.sizes.at(0);
  InverseEstimate e;
  const double J = 1.0 / (1.0 - m * m) - 1.0 / (N * var);
  e.J_hat = Matrix::Constant(1, 1, J);
  e.h_hat = Vector::Constant(1, std::atanh(m) - J * m);
  e.chi_hat = Matrix::Constant(1, 1, N * var);
  e.diagnostics = diagnose(moments, e.chi_hat);
  return e;
}

InverseEstimate invert_susceptibility(const MagnetizationVector& mu, const Matrix& chi,
                                      const Vector& alpha) {
  const Eigen::Index n = mu.size();
  if (chi.rows() != n || chi.cols() != n || alpha.size() != n)
    fail(ErrorCode::DimensionMismatch, "inputs must share the species count");
  if ((alpha.array() <= 0.0).any() || std::abs(alpha.sum() - 1.0) > 1e-12)
    fail(ErrorCode::BadAlpha, "alpha must be positive and sum to 1");
  check_saturation(mu);
  const double cond = condition_number(chi);
  if (cond > kCondLimit) fail(ErrorCode::SingularChi, "susceptibility matrix is numerically singular");
  const Vector p_inv = (1.0 - mu.array().square()).inverse().matrix();
  const Matrix chi_inv = chi.fullPivLu().inverse();
  Matrix X = Matrix(p_inv.asDiagonal()) - chi_inv;
  X = X * alpha.cwiseInverse().asDiagonal();
  InverseEstimate e;
  e.J_hat = 0.5 * (X + X.transpose());
  e.h_hat.resize(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) s += alpha[k] * e.J_hat(l, k) * mu[k];
    e.h_hat[l] = std::atanh(mu[l]) - s;
  }
  e.chi_hat = chi;
  e.diagnostics.chi_condition = cond;
  e.diagnostics.saturation_margin = 1.0 - mu.cwiseAbs().maxCoeff();
  return e;
}

InverseEstimate invert_multi(const EmpiricalMoments& moments, const Vector& alpha) {
  check_saturation(moments.mean);
  const Matrix chi = empirical_susceptibility(moments);
  InverseEstimate e = invert_susceptibility(moments.mean, chi, alpha);
  e.diagnostics = diagnose(moments, chi);
  return e;
}

InverseEstimate invert_conditioned(const SampleSet& samples, const MagnetizationVector& centre,
                                   double radius, const Vector& alpha) {
  const SampleSet kept = restrict_to_ball(samples, centre, radius);
  const EmpiricalMoments m = estimate_moments(kept);
  return kept.n == 1 ? invert_cw(m) : invert_multi(m, alpha);
}

double log_likelihood(const ValidatedModel& model, const SampleSet& samples, const ExactOptions& opts) {
  check_rows(samples);
  if (samples.n != model.species()) fail(ErrorCode::DimensionMismatch, "sample and model species differ");
  const double lz = log_partition(model, samples.sizes, opts);
  const int n = samples.n;
  double N = 0.0;
  for (int s : samples.sizes) N += s;
  const double base = -N * std::numbers::ln2 - lz;
  const Matrix& J = model.J();
  const Vector& h = model.h();
  return pairwise(0, samples.count(), [&](std::size_t i) {
    const auto r = samples.row(i);
    double quad = 0.0;
    double lin = 0.0;
    for (int l = 0; l < n; ++l) {
      double row = 0.0;
      for (int s = 0; s < n; ++s) row += J(l, s) * static_cast<double>(r[s]);
      quad += static_cast<double>(r[l]) * row;
      lin += h[l] * static_cast<double>(r[l]);
    }
    return quad / (2.0 * N) + lin + base;
  });
}

InverseEstimate mle_fit(const SampleSet& samples, const Vector& alpha, const ExactOptions& opts) {
  const EmpiricalMoments m = estimate_moments(samples);
  InverseEstimate e = samples.n == 1 ? invert_cw(m) : invert_multi(m, alpha);
  ModelSpec spec;
  spec.n = samples.n;
  spec.alpha = alpha;
  spec.J = e.J_hat;
  spec.h = e.h_hat;
  try {
    e.log_likelihood = log_likelihood(validate_model(spec), samples, opts);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::NonPositiveDiagonal) throw;
  }
  return e;
}

}  // namespace meanfield
