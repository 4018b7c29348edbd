#include "meanfield/polynomial.hpp"

#include <cmath>

#include "meanfield/error.hpp"

namespace meanfield {

namespace {

void enumerate(int dimension, int remaining, std::vector<int>& current,
               std::vector<std::vector<int>>& out) {
  const int slot = static_cast<int>(current.size());
  if (slot == dimension - 1) {
    current.push_back(remaining);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current.push_back(e);
    enumerate(dimension, remaining - e, current, out);
    current.pop_back();
  }
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

std::vector<std::vector<int>> monomial_exponents(int dimension, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  if (dimension > 0) enumerate(dimension, degree, current, out);
  return out;
}

HomogeneousForm::HomogeneousForm(int dimension, int degree, std::vector<Monomial> terms)
    : dimension_(dimension), degree_(degree), terms_(std::move(terms)) {
  for (const Monomial& t : terms_) {
    int total = 0;
    if (static_cast<int>(t.exponents.size()) != dimension_)
      fail(ErrorCode::DimensionMismatch, "monomial exponent count must equal the dimension");
    for (int e : t.exponents) total += e;
    if (total != degree_) fail(ErrorCode::DimensionMismatch, "monomial is not of the form degree");
  }
}

double HomogeneousForm::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != dimension_) fail(ErrorCode::DimensionMismatch, "form evaluated at wrong dimension");
  double acc = 0.0;
  for (const Monomial& t : terms_) {
    double v = t.coefficient;
    for (int i = 0; i < dimension_; ++i) {
      if (t.exponents[i] != 0) v *= std::pow(x[i], t.exponents[i]);
    }
    acc += v;
  }
  return acc;
}

HomogeneousForm HomogeneousForm::rescaled(const Eigen::VectorXd& scale) const {
  if (scale.size() != dimension_) fail(ErrorCode::DimensionMismatch, "scale has wrong dimension");
  std::vector<Monomial> terms = terms_;
  for (Monomial& t : terms) {
    for (int i = 0; i < dimension_; ++i) t.coefficient /= std::pow(scale[i], t.exponents[i]);
  }
  return HomogeneousForm(dimension_, degree_, std::move(terms));
}

HomogeneousForm HomogeneousForm::power_sum(const Eigen::MatrixXd& rows,
                                           const Eigen::VectorXd& weights, int degree) {
  const int n = static_cast<int>(rows.cols());
  std::vector<Monomial> terms;
  for (auto& exps : monomial_exponents(n, degree)) {
    // coefficient of x^a in (1/d!) (b.x)^d is prod b_i^{a_i} / prod a_i!
    double coeff = 0.0;
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      double v = weights[r];
      for (int i = 0; i < n; ++i) v *= std::pow(rows(r, i), exps[i]);
      coeff += v;
    }
    for (int e : exps) coeff /= factorial(e);
    terms.push_back({std::move(exps), coeff});
  }
  return HomogeneousForm(n, degree, std::move(terms));
}

}  // namespace meanfield
