// Models shared by the test programs.
#pragma once

#include "meanfield/model.hpp"

namespace testmodels {

using namespace meanfield;

inline ModelSpec spec(Vector alpha, Matrix J, Vector h) {
  ModelSpec s;
  s.n = static_cast<int>(alpha.size());
  s.alpha = std::move(alpha);
  s.J = std::move(J);
  s.h = std::move(h);
  return s;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double x : row) out(r, c++) = x;
    ++r;
  }
  return out;
}

/// alpha = (1/2, 1/2), J = [[1, 0.5], [0.5, 1]], h = (0.2, -0.1).
inline ValidatedModel reference() {
  return validate_model(spec(vec({0.5, 0.5}), mat({{1.0, 0.5}, {0.5, 1.0}}), vec({0.2, -0.1})));
}

inline ValidatedModel two_species(double a1, Matrix J, Vector h) {
  return validate_model(spec(vec({a1, 1.0 - a1}), std::move(J), std::move(h)));
}

}  // namespace testmodels
