// Forward problem: pressure functionals, mean-field equations, classification
// of the global maxima and the thermodynamic pressure limit.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "meanfield/model.hpp"
#include "meanfield/polynomial.hpp"

namespace meanfield {

/// Binary entropy rate I(x) = ((1+x) ln(1+x) + (1-x) ln(1-x)) / 2 on [-1, 1].
double entropy_I(double x);

/// Variational functional on magnetizations (symmetric +-1 spins only):
/// fbar(x) = g(x) - sum_l alpha_l I(x_l).
double functional_fbar(const ValidatedModel& model, const MagnetizationVector& x);

/// Gaussian-transform functional, defined on all of R^n:
/// f(x) = -1/2 <J~ x, x> + sum_l alpha_l ln E_rho[exp(s y_l)], y = J diag(alpha) x + h.
double functional_f(const ValidatedModel& model, const Vector& x);
Vector gradient_f(const ValidatedModel& model, const Vector& x);
Matrix hessian_f(const ValidatedModel& model, const Vector& x);

/// Right-hand side of the mean-field equations; component l is the tilted
/// mean of the site measure at effective field y_l (tanh y_l for +-1 spins).
MagnetizationVector mean_field_map(const ValidatedModel& model, const MagnetizationVector& x);

struct SolverOptions {
  int grid_points = 11;          ///< starts per axis
  double grid_margin = 0.005;    ///< fraction of the support range kept clear of each edge
  double damping = 0.7;
  int max_iterations = 10000;
  double tolerance = 1e-12;
  double dedup_radius = 1e-8;
  int threads = 1;
};

struct StationaryPoint {
  MagnetizationVector x;
  double residual = 0.0;  ///< ||x - mean_field_map(x)||_inf
  double f_value = 0.0;
  std::optional<double> fbar_value;  ///< present for +-1 spins
};

/// All distinct fixed points reached by damped iteration from a grid of
/// starts, each polished by Newton's method; sorted lexicographically.
std::vector<StationaryPoint> solve_fixed_points(const ValidatedModel& model,
                                                const SolverOptions& opts = {});

struct MaximumClassification {
  StationaryPoint point;
  int k = 1;                        ///< homogeneous type
  std::optional<double> strength;   ///< one species: the 2k-th derivative of f
  Matrix hessian;                   ///< Hessian of f at the point
  std::optional<HomogeneousForm> leading_form;  ///< degree-2k Taylor term, k >= 2
  bool is_global = false;
};

/// Type and strength (one species) or Hessian / quartic form (several
/// species) of a local maximum of f.
MaximumClassification classify_maximum(const ValidatedModel& model, const StationaryPoint& point);

struct PressureResult {
  double limit_value = 0.0;
  std::vector<MaximumClassification> maxima;
  std::optional<double> method_agreement;  ///< |max f - max fbar| when J is positive definite
  std::vector<StationaryPoint> stationary_points;
};

PressureResult pressure_limit(const ValidatedModel& model, const SolverOptions& opts = {});

/// max of f over R^n by Newton ascent from the solver grid, independent of
/// the fixed-point iteration.
double maximize_f(const ValidatedModel& model, const SolverOptions& opts = {});

/// Cholesky test of D J D.
bool coupling_positive_definite(const ValidatedModel& model);

struct PhaseRow {
  double J = 0.0;
  double magnetization = 0.0;  ///< largest global maximizer
  double pressure = 0.0;
  double dp_dJ = 0.0;          ///< mu^2 / 2
  std::optional<double> second_difference;
};

/// Curie-Weiss scan over an ascending grid of couplings at fixed field.
std::vector<PhaseRow> cw_phase_scan(std::span<const double> J_grid, double h,
                                    const SolverOptions& opts = {});

}  // namespace meanfield
