// Multi-species mean-field spin model: definition, validation and the
// Hamiltonian written through the species magnetizations.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "meanfield/measure.hpp"

namespace meanfield {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Per-species magnetizations m_l, one component per species.
using MagnetizationVector = Eigen::VectorXd;

/// Raw, unchecked model description as read from a config file.
struct ModelSpec {
  int n = 1;
  Vector alpha;  ///< relative species sizes N_l / N
  Matrix J;      ///< reduced interaction matrix
  Vector h;      ///< per-species field
  FiniteMeasure site_measure = FiniteMeasure::symmetric_binary();
};

/// A model that passed validate_model(). Immutable; carries the derived
/// matrices used throughout the forward and inverse computations.
class ValidatedModel {
 public:
  int species() const { return spec_.n; }
  const Vector& alpha() const { return spec_.alpha; }
  const Matrix& J() const { return spec_.J; }
  const Vector& h() const { return spec_.h; }
  const FiniteMeasure& measure() const { return spec_.site_measure; }
  const ModelSpec& spec() const { return spec_; }
  bool binary() const { return spec_.site_measure.is_symmetric_binary(); }

  /// diag(alpha) J diag(alpha): the quadratic form of g.
  const Matrix& scaled_coupling() const { return j_tilde_; }
  /// alpha .* h: the linear form of g.
  const Vector& scaled_field() const { return h_tilde_; }
  /// J diag(alpha): maps magnetizations to effective fields, y = B x + h.
  const Matrix& field_coupling() const { return field_coupling_; }
  /// D J D with D = diag(sqrt(alpha)).
  const Matrix& symmetric_coupling() const { return a_matrix_; }

  /// Effective fields y_l = sum_s alpha_s J_ls x_s + h_l.
  Vector effective_field(const Vector& x) const { return field_coupling_ * x + spec_.h; }

 private:
  friend ValidatedModel validate_model(const ModelSpec& spec);
  explicit ValidatedModel(ModelSpec spec);

  ModelSpec spec_;
  Matrix j_tilde_;
  Vector h_tilde_;
  Matrix field_coupling_;
  Matrix a_matrix_;
};

/// Checks every structural invariant of the model and returns it wrapped.
/// Throws Error with NonSymmetricJ, BadAlpha, DegenerateMeasure,
/// NonPositiveDiagonal or DimensionMismatch.
ValidatedModel validate_model(const ModelSpec& spec);

/// Convenience constructor for the one-species Curie-Weiss model.
ValidatedModel curie_weiss(double J, double h);

/// Spins laid out in contiguous species blocks: the first partition[0]
/// sites belong to species 0, and so on.
struct Configuration {
  std::vector<double> spins;
  std::vector<int> partition;
};

/// Verifies spin values against the site measure and the block sizes
/// against alpha (|N_l/N - alpha_l| <= 1/N).
void validate_configuration(const ValidatedModel& model, const Configuration& config);

/// Per-species averages (1/N_l) sum_{i in P_l} sigma_i.
MagnetizationVector magnetization(const Configuration& config);

/// g(m) = 1/2 <J~ m, m> + <h~, m>, so that H_N = -N g(m).
double hamiltonian_density(const ValidatedModel& model, const MagnetizationVector& m);

}  // namespace meanfield
