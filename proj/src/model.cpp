#include "meanfield/model.hpp"

#include <cmath>
#include <string>

#include "meanfield/error.hpp"

namespace meanfield {

namespace {
constexpr double kStructTol = 1e-12;
}

ValidatedModel::ValidatedModel(ModelSpec spec) : spec_(std::move(spec)) {
  const Vector& a = spec_.alpha;
  j_tilde_ = a.asDiagonal() * spec_.J * a.asDiagonal();
  h_tilde_ = a.cwiseProduct(spec_.h);
  field_coupling_ = spec_.J * a.asDiagonal();
  const Vector d = a.cwiseSqrt();
  a_matrix_ = d.asDiagonal() * spec_.J * d.asDiagonal();
}

ValidatedModel validate_model(const ModelSpec& spec) {
  const int n = spec.n;
  if (n < 1) fail(ErrorCode::DimensionMismatch, "species count must be positive");
  if (spec.alpha.size() != n || spec.h.size() != n || spec.J.rows() != n || spec.J.cols() != n)
    fail(ErrorCode::DimensionMismatch, "alpha, J and h must match the species count");
  if (!spec.alpha.allFinite() || !spec.h.allFinite() || !spec.J.allFinite())
    fail(ErrorCode::DimensionMismatch, "model parameters must be finite");

  for (int l = 0; l < n; ++l) {
    if (spec.alpha[l] <= 0.0) fail(ErrorCode::BadAlpha, "alpha entries must be positive");
  }
  if (std::abs(spec.alpha.sum() - 1.0) > kStructTol)
    fail(ErrorCode::BadAlpha, "alpha must sum to 1, got " + std::to_string(spec.alpha.sum()));

  for (int l = 0; l < n; ++l) {
    for (int s = l + 1; s < n; ++s) {
      if (std::abs(spec.J(l, s) - spec.J(s, l)) > kStructTol)
        fail(ErrorCode::NonSymmetricJ, "J must be symmetric");
    }
  }
  for (int l = 0; l < n; ++l) {
    if (spec.J(l, l) <= 0.0)
      fail(ErrorCode::NonPositiveDiagonal, "diagonal couplings J_ll must be positive");
  }
  // FiniteMeasure validates itself on construction; the count is rechecked
  // here so that a default-constructed spec can never slip through.
  if (spec.site_measure.atoms().size() < 2)
    fail(ErrorCode::DegenerateMeasure, "site measure needs at least two support points");

  return ValidatedModel(spec);
}

ValidatedModel curie_weiss(double J, double h) {
  ModelSpec spec;
  spec.n = 1;
  spec.alpha = Vector::Ones(1);
  spec.J = Matrix::Constant(1, 1, J);
  spec.h = Vector::Constant(1, h);
  return validate_model(spec);
}

void validate_configuration(const ValidatedModel& model, const Configuration& config) {
  if (static_cast<int>(config.partition.size()) != model.species())
    fail(ErrorCode::DimensionMismatch, "partition length must equal the species count");
  long total = 0;
  for (int size : config.partition) {
    if (size <= 0) fail(ErrorCode::InvalidConfiguration, "species blocks must be non-empty");
    total += size;
  }
  if (total != static_cast<long>(config.spins.size()))
    fail(ErrorCode::InvalidConfiguration, "partition does not cover the spins");
  for (double s : config.spins) {
    if (!model.measure().contains(s))
      fail(ErrorCode::InvalidConfiguration, "spin value outside the site measure support");
  }
  const double N = static_cast<double>(total);
  for (int l = 0; l < model.species(); ++l) {
    if (std::abs(config.partition[l] / N - model.alpha()[l]) > 1.0 / N + kStructTol)
      fail(ErrorCode::InvalidConfiguration, "block sizes do not match alpha");
  }
}

MagnetizationVector magnetization(const Configuration& config) {
  MagnetizationVector m(static_cast<Eigen::Index>(config.partition.size()));
  std::size_t offset = 0;
  for (std::size_t l = 0; l < config.partition.size(); ++l) {
    const auto size = static_cast<std::size_t>(config.partition[l]);
    if (offset + size > config.spins.size())
      fail(ErrorCode::InvalidConfiguration, "partition exceeds the number of spins");
    double sum = 0.0;
    for (std::size_t i = 0; i < size; ++i) sum += config.spins[offset + i];
    m[static_cast<Eigen::Index>(l)] = sum / static_cast<double>(size);
    offset += size;
  }
  return m;
}

double hamiltonian_density(const ValidatedModel& model, const MagnetizationVector& m) {
  if (m.size() != model.species())
    fail(ErrorCode::DimensionMismatch, "magnetization dimension must equal the species count");
  return 0.5 * m.dot(model.scaled_coupling() * m) + model.scaled_field().dot(m);
}

}  // namespace meanfield
