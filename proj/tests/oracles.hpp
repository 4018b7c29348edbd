// Independent reference computations used only by the tests. None of these
// call into the library's numerical code paths.
#pragma once

#include <algorithm>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "meanfield/model.hpp"

namespace oracle {

using meanfield::Matrix;
using meanfield::Vector;
using big = boost::multiprecision::cpp_dec_float_50;

/// Direct double-sum Hamiltonian with the block-constant N x N coupling.
inline double hamiltonian_direct(const Matrix& J, const Vector& h, const std::vector<int>& sizes,
                                 const std::vector<double>& spins) {
  std::vector<int> label;
  for (std::size_t l = 0; l < sizes.size(); ++l) label.insert(label.end(), sizes[l], static_cast<int>(l));
  const double N = static_cast<double>(spins.size());
  double pair = 0.0;
  double field = 0.0;
  for (std::size_t i = 0; i < spins.size(); ++i) {
    for (std::size_t j = 0; j < spins.size(); ++j) pair += J(label[i], label[j]) * spins[i] * spins[j];
    field += h[label[i]] * spins[i];
  }
  return -pair / (2.0 * N) - field;
}

/// ln Z_N = ln 2^{-N} sum_sigma exp(-H(sigma)) by enumerating all 2^N spin
/// configurations.
inline double brute_log_partition(const Matrix& J, const Vector& h, const std::vector<int>& sizes) {
  int N = 0;
  for (int s : sizes) N += s;
  std::vector<double> terms;
  terms.reserve(std::size_t{1} << N);
  std::vector<double> spins(N);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << N); ++mask) {
    for (int i = 0; i < N; ++i) spins[i] = (mask >> i) & 1U ? 1.0 : -1.0;
    terms.push_back(-hamiltonian_direct(J, h, sizes, spins));
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  long double s = 0.0L;
  for (double t : terms) s += std::exp(static_cast<long double>(t - top));
  return top + static_cast<double>(std::log(s)) - N * std::log(2.0);
}

/// Positive root of mu = tanh(J mu + h) on (0, 1) by bisection.
inline double bisect_mu(double J, double h) {
  double lo = 1e-300;
  double hi = 1.0;
  auto g = [&](double m) { return m - std::tanh(J * m + h); };
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// ln binomial(n, k) from an exact big-integer coefficient.
inline double log_binomial_exact(int n, int k) {
  boost::multiprecision::cpp_int c = 1;
  for (int i = 1; i <= k; ++i) {
    c *= n - k + i;
    c /= i;
  }
  return static_cast<double>(log(big(c)));
}

inline big entropy_big(const big& x) {
  big out = 0;
  if (1 + x > 0) out += (1 + x) * log(1 + x);
  if (1 - x > 0) out += (1 - x) * log(1 - x);
  return out / 2;
}

/// fbar with 50-digit arithmetic.
inline double fbar_big(const Vector& alpha, const Matrix& J, const Vector& h, const Vector& x) {
  const int n = static_cast<int>(x.size());
  big total = 0;
  for (int l = 0; l < n; ++l) {
    for (int s = 0; s < n; ++s) total += big(alpha[l]) * alpha[s] * J(l, s) * x[l] * x[s] / 2;
    total += big(alpha[l]) * h[l] * x[l];
    total -= big(alpha[l]) * entropy_big(big(x[l]));
  }
  return static_cast<double>(total);
}

/// Mean-field right-hand side tanh(sum_s alpha_s J_ls x_s + h_l), in 50 digits.
inline Vector tanh_map_big(const Vector& alpha, const Matrix& J, const Vector& h, const Vector& x) {
  Vector out(x.size());
  for (Eigen::Index l = 0; l < x.size(); ++l) {
    big y = h[l];
    for (Eigen::Index s = 0; s < x.size(); ++s) y += big(alpha[s]) * J(l, s) * x[s];
    out[l] = static_cast<double>(tanh(y));
  }
  return out;
}

inline Vector central_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double step) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector a = x;
    Vector b = x;
    a[i] += step;
    b[i] -= step;
    g[i] = (f(a) - f(b)) / (2.0 * step);
  }
  return g;
}

/// Independent spins with field h: m = (2K - N)/N, K ~ Binomial(N, p),
/// p = e^h / (e^h + e^-h). Returns {<m>, N Var(m)}.
inline std::pair<double, double> bernoulli_moments(double h) {
  const double p = 1.0 / (1.0 + std::exp(-2.0 * h));
  return {2.0 * p - 1.0, 4.0 * p * (1.0 - p)};
}

}  // namespace oracle
