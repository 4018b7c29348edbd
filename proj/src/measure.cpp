#include "meanfield/measure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "meanfield/error.hpp"

namespace meanfield {

namespace {

constexpr double kMeasureTol = 1e-12;

// Coefficients (in powers of t = tanh y) of the derivatives of ln cosh:
// d/dy ln cosh = t, and d/dy P(t) = P'(t) (1 - t^2).
using Poly = std::array<double, kMaxDerivativeOrder + 2>;

std::array<Poly, kMaxDerivativeOrder + 1> make_log_cosh_polys() {
  std::array<Poly, kMaxDerivativeOrder + 1> polys{};
  polys[1][1] = 1.0;
  for (int order = 1; order < kMaxDerivativeOrder; ++order) {
    Poly deriv{};
    for (std::size_t p = 1; p < deriv.size(); ++p) deriv[p - 1] = p * polys[order][p];
    Poly next{};
    for (std::size_t p = 0; p + 2 < next.size(); ++p) {
      next[p] += deriv[p];
      next[p + 2] -= deriv[p];
    }
    polys[order + 1] = next;
  }
  return polys;
}

const std::array<Poly, kMaxDerivativeOrder + 1>& log_cosh_polys() {
  static const auto polys = make_log_cosh_polys();
  return polys;
}

}  // namespace

double log_cosh(double y) {
  const double a = std::abs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double log_cosh_derivative(int order, double y) {
  if (order < 0 || order > kMaxDerivativeOrder)
    fail(ErrorCode::DomainError, "ln cosh derivative order out of range");
  if (order == 0) return log_cosh(y);
  const double t = std::tanh(y);
  const Poly& p = log_cosh_polys()[order];
  double acc = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * t + p[i];
  return acc;
}

FiniteMeasure::FiniteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.size() < 2)
    fail(ErrorCode::DegenerateMeasure, "site measure needs at least two support points");
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (!std::isfinite(a.location) || !std::isfinite(a.weight))
      fail(ErrorCode::BadMeasure, "site measure atoms must be finite");
    if (a.weight <= 0.0) fail(ErrorCode::BadMeasure, "site measure weights must be positive");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > kMeasureTol)
    fail(ErrorCode::BadMeasure, "site measure weights must sum to 1");
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (std::size_t i = 1; i < atoms_.size(); ++i) {
    if (atoms_[i].location == atoms_[i - 1].location)
      fail(ErrorCode::BadMeasure, "site measure locations must be distinct");
  }
  min_ = atoms_.front().location;
  max_ = atoms_.back().location;
  symmetric_binary_ = atoms_.size() == 2 && min_ == -1.0 && max_ == 1.0 &&
                      std::abs(atoms_[0].weight - 0.5) <= kMeasureTol &&
                      std::abs(atoms_[1].weight - 0.5) <= kMeasureTol;
}

FiniteMeasure FiniteMeasure::symmetric_binary() {
  return FiniteMeasure({{-1.0, 0.5}, {1.0, 0.5}});
}

bool FiniteMeasure::contains(double value) const {
  return std::any_of(atoms_.begin(), atoms_.end(), [value](const Atom& a) {
    return std::abs(a.location - value) <= kMeasureTol;
  });
}

double FiniteMeasure::log_mgf(double y) const {
  double top = -INFINITY;
  for (const Atom& a : atoms_) top = std::max(top, std::log(a.weight) + a.location * y);
  double sum = 0.0;
  for (const Atom& a : atoms_) sum += std::exp(std::log(a.weight) + a.location * y - top);
  return top + std::log(sum);
}

double FiniteMeasure::log_mgf_derivative(int order, double y) const {
  if (order < 0 || order > kMaxDerivativeOrder)
    fail(ErrorCode::DomainError, "log-mgf derivative order out of range");
  const double lz = log_mgf(y);
  if (order == 0) return lz;

  double mean = 0.0;
  std::vector<double> prob(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    prob[i] = std::exp(std::log(atoms_[i].weight) + atoms_[i].location * y - lz);
    mean += prob[i] * atoms_[i].location;
  }
  if (order == 1) return mean;

  // central moments, then cumulants of the centred variable
  std::array<double, kMaxDerivativeOrder + 1> central{};
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const double d = atoms_[i].location - mean;
    double pw = 1.0;
    for (int k = 0; k <= order; ++k) {
      central[k] += prob[i] * pw;
      pw *= d;
    }
  }
  central[1] = 0.0;
  std::array<double, kMaxDerivativeOrder + 1> kappa{};
  for (int n = 1; n <= order; ++n) {
    double acc = central[n];
    double binom = 1.0;  // C(n-1, j-1)
    for (int j = 1; j < n; ++j) {
      acc -= binom * kappa[j] * central[n - j];
      binom = binom * (n - j) / j;
    }
    kappa[n] = acc;
  }
  return kappa[order];
}

}  // namespace meanfield
