// Homogeneous polynomials in n variables, stored as a monomial table.
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace meanfield {

struct Monomial {
  std::vector<int> exponents;  // one per variable, summing to the degree
  double coefficient;
};

class HomogeneousForm {
 public:
  HomogeneousForm() = default;
  HomogeneousForm(int dimension, int degree, std::vector<Monomial> terms);

  int dimension() const { return dimension_; }
  int degree() const { return degree_; }
  const std::vector<Monomial>& terms() const { return terms_; }

  double operator()(const Eigen::VectorXd& x) const;

  /// The form evaluated at x ./ scale, i.e. F(x_1/c_1, ..., x_n/c_n).
  HomogeneousForm rescaled(const Eigen::VectorXd& scale) const;

  /// Form (1/d!) sum_r w_r (b_r . x)^d built from row vectors b_r of `rows`.
  static HomogeneousForm power_sum(const Eigen::MatrixXd& rows, const Eigen::VectorXd& weights,
                                   int degree);

 private:
  int dimension_ = 0;
  int degree_ = 0;
  std::vector<Monomial> terms_;
};

/// All exponent vectors of length `dimension` summing to `degree`, in
/// lexicographically decreasing order.
std::vector<std::vector<int>> monomial_exponents(int dimension, int degree);

}  // namespace meanfield
