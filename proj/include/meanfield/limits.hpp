// Limiting laws of magnetizations and normalized spin sums, susceptibilities
// and distances between finite-N and limiting distributions.
#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "meanfield/exact.hpp"
#include "meanfield/forward.hpp"
#include "meanfield/model.hpp"
#include "meanfield/polynomial.hpp"

namespace meanfield {

struct GaussianLaw {
  Matrix cov;
};

/// Density exp(form(x)) / exp(log_normalizer) on R^dim.
struct HigherOrderLaw {
  int k = 2;
  HomogeneousForm form;
  double log_normalizer = 0.0;
};

struct DeltaMixtureLaw {
  std::vector<MagnetizationVector> points;
  std::vector<double> weights;
};

using LimitLaw = std::variant<GaussianLaw, HigherOrderLaw, DeltaMixtureLaw>;

int law_dimension(const LimitLaw& law);

/// chi = (1 - mu^2) / (1 - J (1 - mu^2)). The field enters only through mu.
double susceptibility_cw(double J, double h, double mu);

/// Solution of chi = P (I + J D^2 chi), P = diag(K''(y_l)) (1 - mu_l^2 for
/// +-1 spins), D^2 = diag(alpha).
Matrix susceptibility_matrix(const ValidatedModel& model, const MagnetizationVector& mu);

/// -H~^{-1} - A^{-1} at a type-1 maximum, H~ = D^{-1} H_f D^{-1}, A = D J D.
Matrix covariance_tilde(const ValidatedModel& model, const MaximumClassification& maximum);

/// D chi D^{-1}: the same matrix obtained from the susceptibilities.
Matrix rescaled_susceptibility(const ValidatedModel& model, const Matrix& chi);

/// Matrix with chi_ll on the diagonal and sign(chi_ls) sqrt(chi_ls chi_sl)
/// off it. Empty when some product chi_ls chi_sl is negative.
std::optional<Matrix> susceptibility_display(const Matrix& chi);

/// ln of the integral of exp(form) over R^dim; form must be negative off 0.
double log_integral_exp(const HomogeneousForm& form);

/// Limit law of ((S_l - N_l mu_l) / N_l^{1 - 1/(2k)})_l at the given maximum.
/// Unless `conditioned`, the maximum must be the unique global one.
LimitLaw build_limit_law(const ValidatedModel& model, const MaximumClassification& maximum,
                         bool conditioned, const SolverOptions& opts = {});

/// Limit law of the magnetization vector: point masses at the global maxima
/// of maximal type, weighted by the integral of exp of their leading forms.
DeltaMixtureLaw magnetization_limit_law(const ValidatedModel& model,
                                        const std::vector<MaximumClassification>& maxima);
DeltaMixtureLaw magnetization_limit_law(const ValidatedModel& model, const SolverOptions& opts = {});

double law_density(const LimitLaw& law, const Vector& x);
double law_cdf_1d(const LimitLaw& law, double x);
/// Left limit of the distribution function, P(X < x).
double law_cdf_1d_left(const LimitLaw& law, double x);

/// Kolmogorov-Smirnov distance between one-dimensional laws.
double ks_distance(const DiscreteLaw& empirical, const LimitLaw& law);
double ks_distance(std::span<const double> samples, const LimitLaw& law);
double ks_distance(const DiscreteLaw& a, const DiscreteLaw& b);

/// Empirical law of one-dimensional samples.
DiscreteLaw empirical_law(std::span<const double> samples);

}  // namespace meanfield
