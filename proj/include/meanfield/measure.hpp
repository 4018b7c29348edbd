// Single-site spin distribution with finite support.
#pragma once

#include <span>
#include <vector>

namespace meanfield {

struct Atom {
  double location;
  double weight;
};

/// Probability measure on finitely many spin values.
///
/// Construction validates the atoms: at least two distinct locations,
/// strictly positive weights summing to one within 1e-12. The symmetric
/// binary measure (1/2 on each of -1 and +1) is the default spin law of
/// every model in this library and enables the closed-form ln cosh paths.
class FiniteMeasure {
 public:
  explicit FiniteMeasure(std::vector<Atom> atoms);

  static FiniteMeasure symmetric_binary();

  std::span<const Atom> atoms() const { return atoms_; }
  double min_support() const { return min_; }
  double max_support() const { return max_; }
  bool is_symmetric_binary() const { return symmetric_binary_; }
  bool contains(double value) const;

  /// ln of the moment generating function, ln sum_i w_i exp(s_i y), in
  /// log-sum-exp form.
  double log_mgf(double y) const;

  /// order-th derivative of log_mgf at y (the order-th cumulant of the
  /// tilted measure). Supports 0 <= order <= 8.
  double log_mgf_derivative(int order, double y) const;

 private:
  std::vector<Atom> atoms_;
  double min_ = 0.0;
  double max_ = 0.0;
  bool symmetric_binary_ = false;
};

/// ln cosh(y), stable for large |y|.
double log_cosh(double y);

/// order-th derivative of ln cosh at y, 0 <= order <= 8.
double log_cosh_derivative(int order, double y);

inline constexpr int kMaxDerivativeOrder = 8;

}  // namespace meanfield
