// Inverse problem: recovery of (J, h) from magnetization moments.
#pragma once

#include <optional>

#include "meanfield/exact.hpp"
#include "meanfield/model.hpp"

namespace meanfield {

struct EmpiricalMoments {
  Vector mean;    ///< average of m_l over the sample
  Matrix second;  ///< average of m_l m_s
  Sizes sizes;
  std::size_t sample_count = 0;  ///< 0 when built from exact moments

  static EmpiricalMoments from_exact(const ExactMoments& exact);
};

struct InverseDiagnostics {
  double chi_condition = 1.0;       ///< 2-norm condition number of chi_hat
  double min_variance = 0.0;        ///< smallest Var(m_l)
  double saturation_margin = 1.0;   ///< 1 - max_l |mean_l|
  std::size_t rows_used = 0;
};

struct InverseEstimate {
  Matrix J_hat;
  Vector h_hat;
  Matrix chi_hat;
  InverseDiagnostics diagnostics;
  std::optional<double> log_likelihood;  ///< set by mle_fit when the estimate is a valid model
};

/// Plain sample averages of m and m m^T.
EmpiricalMoments estimate_moments(const SampleSet& samples);

/// chi_ls = N_s (<m_l m_s> - <m_l><m_s>).
Matrix empirical_susceptibility(const EmpiricalMoments& moments);

/// One species: J = 1/(1 - m^2) - 1/(N Var m), h = atanh(m) - J m.
InverseEstimate invert_cw(const EmpiricalMoments& moments);

/// Several species: J = (P^{-1} - chi^{-1}) diag(1/alpha), symmetrized,
/// then h_l = atanh(mu_l) - sum_s alpha_s J_ls mu_s.
InverseEstimate invert_multi(const EmpiricalMoments& moments, const Vector& alpha);

/// The same formulas applied to given equilibrium magnetizations and
/// susceptibility matrix.
InverseEstimate invert_susceptibility(const MagnetizationVector& mu, const Matrix& chi,
                                      const Vector& alpha);

/// Rows whose magnetization lies in the closed ball B(centre, radius), then
/// the unconditioned estimator.
InverseEstimate invert_conditioned(const SampleSet& samples, const MagnetizationVector& centre,
                                   double radius, const Vector& alpha);

/// Moment-matching maximum likelihood fit, with the log-likelihood of the
/// sample at the estimate.
InverseEstimate mle_fit(const SampleSet& samples, const Vector& alpha, const ExactOptions& opts = {});

/// sum over draws of ln P(sigma) = N g(m) - N ln 2 - ln Z_N.
double log_likelihood(const ValidatedModel& model, const SampleSet& samples,
                      const ExactOptions& opts = {});

}  // namespace meanfield
