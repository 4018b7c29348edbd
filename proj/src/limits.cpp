#include "meanfield/limits.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <functional>
#include <numbers>

#include "meanfield/error.hpp"

namespace meanfield {

namespace {

constexpr double kCondLimit = 1e10;

double condition_number(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double lo = s[s.size() - 1];
  return lo == 0.0 ? std::numeric_limits<double>::infinity() : s[0] / lo;
}

Vector sqrt_alpha(const ValidatedModel& model) { return model.alpha().cwiseSqrt(); }

bool positive_definite(const Matrix& M) {
  if (!M.isApprox(M.transpose(), 1e-9)) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() > 0.0;
}

// Integral of g over the unit sphere S^{n-1}, in hyperspherical angles.
double sphere_integral(int n, const std::function<double(const Vector&)>& g) {
  using boost::math::quadrature::gauss_kronrod;
  constexpr double pi = std::numbers::pi;
  std::vector<double> angles(n - 1);
  std::function<double(int)> level = [&](int depth) -> double {
    const int remaining = n - 1 - depth;
    if (remaining == 1) {
      auto inner = [&](double phi) {
        angles[depth] = phi;
        Vector u(n);
        double s = 1.0;
        for (int i = 0; i < n - 1; ++i) {
          u[i] = s * std::cos(angles[i]);
          s *= std::sin(angles[i]);
        }
        u[n - 1] = s;
        return g(u);
      };
      return gauss_kronrod<double, 61>::integrate(inner, 0.0, 2.0 * pi, 15, 1e-13);
    }
    auto outer = [&, depth, remaining](double phi) {
      angles[depth] = phi;
      return std::pow(std::sin(phi), remaining - 1) * level(depth + 1);
    };
    return gauss_kronrod<double, 61>::integrate(outer, 0.0, pi, 15, 1e-13);
  };
  return level(0);
}

const MaximumClassification* find_point(const std::vector<MaximumClassification>& maxima,
                                        const Vector& x) {
  for (const auto& m : maxima)
    if ((m.point.x - x).cwiseAbs().maxCoeff() <= 1e-6) return &m;
  return nullptr;
}

void require_normalized(const DeltaMixtureLaw& d) {
  double total = 0.0;
  for (double w : d.weights) {
    if (!(w > 0.0)) fail(ErrorCode::Unnormalized, "mixture weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12 || d.points.size() != d.weights.size())
    fail(ErrorCode::Unnormalized, "mixture weights must sum to one");
}

void require_normalized(const HigherOrderLaw& h) {
  if (!std::isfinite(h.log_normalizer)) fail(ErrorCode::Unnormalized, "law has no finite normalizer");
}

void require_normalized(const DiscreteLaw& d) {
  double total = 0.0;
  for (double p : d.probs) total += p;
  if (std::abs(total - 1.0) > 1e-9) fail(ErrorCode::Unnormalized, "discrete law does not sum to one");
}

void require_1d(const LimitLaw& law) {
  if (law_dimension(law) != 1) fail(ErrorCode::DimensionMismatch, "one-dimensional law required");
}

// Distribution function of a 1-d higher-order law with form c x^d.
double higher_order_cdf(const HigherOrderLaw& law, double x) {
  const auto& t = law.form.terms();
  if (t.size() != 1) fail(ErrorCode::Unnormalized, "one-dimensional form must be a single monomial");
  const double c = t.front().coefficient;
  const int d = law.form.degree();
  if (!(c < 0.0)) fail(ErrorCode::Unnormalized, "form must be negative off the origin");
  const double half = 0.5 * boost::math::gamma_p(1.0 / d, -c * std::pow(std::abs(x), d));
  return x < 0.0 ? 0.5 - half : 0.5 + half;
}

double cdf(const LimitLaw& law, double x, bool left) {
  require_1d(law);
  if (const auto* g = std::get_if<GaussianLaw>(&law)) {
    const double var = g->cov(0, 0);
    if (!(var > 0.0)) fail(ErrorCode::Unnormalized, "Gaussian variance must be positive");
    return 0.5 * std::erfc(-x / std::sqrt(2.0 * var));
  }
  if (const auto* h = std::get_if<HigherOrderLaw>(&law)) {
    require_normalized(*h);
    return higher_order_cdf(*h, x);
  }
  const auto& d = std::get<DeltaMixtureLaw>(law);
  require_normalized(d);
  double total = 0.0;
  for (std::size_t i = 0; i < d.points.size(); ++i) {
    const double p = d.points[i][0];
    if (p < x || (!left && p == x)) total += d.weights[i];
  }
  return total;
}

// Sup distance over the union of the atoms, comparing both one-sided limits.
double ks_at_atoms(const DiscreteLaw& a, const std::function<double(double, bool)>& other_cdf,
                   std::vector<double> extra_points) {
  if (a.dim != 1) fail(ErrorCode::DimensionMismatch, "one-dimensional law required");
  require_normalized(a);
  const DiscreteLaw m = a.marginal(0);
  std::vector<double> xs = m.points;
  xs.insert(xs.end(), extra_points.begin(), extra_points.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  double best = 0.0;
  double below = 0.0;  // mass of m strictly left of x
  std::size_t j = 0;
  for (double x : xs) {
    while (j < m.points.size() && m.points[j] < x) below += m.probs[j++];
    const double at = (j < m.points.size() && m.points[j] == x) ? m.probs[j] : 0.0;
    best = std::max(best, std::abs(below - other_cdf(x, true)));
    best = std::max(best, std::abs(below + at - other_cdf(x, false)));
  }
  return best;
}

}  // namespace

int law_dimension(const LimitLaw& law) {
  if (const auto* g = std::get_if<GaussianLaw>(&law)) return static_cast<int>(g->cov.rows());
  if (const auto* h = std::get_if<HigherOrderLaw>(&law)) return h->form.dimension();
  const auto& d = std::get<DeltaMixtureLaw>(law);
  return d.points.empty() ? 0 : static_cast<int>(d.points.front().size());
}

double susceptibility_cw(double J, [[maybe_unused]] double h, double mu) {
  const double p = 1.0 - mu * mu;
  const double denom = 1.0 - J * p;
  if (denom <= 1e-12) fail(ErrorCode::DegenerateMaximum, "1 - J (1 - mu^2) vanishes: degenerate maximum");
  return p / denom;
}

Matrix susceptibility_matrix(const ValidatedModel& model, const MagnetizationVector& mu) {
  const int n = model.species();
  if (mu.size() != n) fail(ErrorCode::DimensionMismatch, "mu dimension must equal the species count");
  Vector p(n);
  if (model.binary()) {
    p = (1.0 - mu.array().square()).matrix();
  } else {
    const Vector y = model.effective_field(mu);
    for (int l = 0; l < n; ++l) p[l] = model.measure().log_mgf_derivative(2, y[l]);
  }
  const Matrix P = p.asDiagonal();
  const Matrix system = Matrix::Identity(n, n) - P * model.field_coupling();
  if (condition_number(system) > kCondLimit)
    fail(ErrorCode::SingularSystem, "I - P J D^2 is singular at this point");
  return system.fullPivLu().solve(P);
}

Matrix covariance_tilde(const ValidatedModel& model, const MaximumClassification& maximum) {
  if (maximum.k != 1) fail(ErrorCode::NotK1, "covariance requires a maximum of type 1");
  if (!coupling_positive_definite(model))
    fail(ErrorCode::NonPositiveDefiniteA, "D J D is not positive definite");
  const Vector d_inv = sqrt_alpha(model).cwiseInverse();
  const Matrix Ht = d_inv.asDiagonal() * maximum.hessian * d_inv.asDiagonal();
  const Matrix A = model.symmetric_coupling();
  const Matrix I = Matrix::Identity(A.rows(), A.cols());
  Matrix out = -Ht.fullPivLu().solve(I) - A.llt().solve(I);
  out = 0.5 * (out + out.transpose());
  if (!positive_definite(out))
    fail(ErrorCode::NotPositiveDefiniteResult, "covariance is not positive definite");
  return out;
}

Matrix rescaled_susceptibility(const ValidatedModel& model, const Matrix& chi) {
  const Vector d = sqrt_alpha(model);
  return d.asDiagonal() * chi * d.cwiseInverse().asDiagonal();
}

std::optional<Matrix> susceptibility_display(const Matrix& chi) {
  Matrix out = chi;
  for (Eigen::Index l = 0; l < chi.rows(); ++l) {
    for (Eigen::Index s = 0; s < chi.cols(); ++s) {
      if (l == s) continue;
      const double prod = chi(l, s) * chi(s, l);
      if (prod < 0.0) return std::nullopt;
      out(l, s) = std::copysign(std::sqrt(prod), chi(l, s));
    }
  }
  return out;
}

double log_integral_exp(const HomogeneousForm& form) {
  const int n = form.dimension();
  const int d = form.degree();
  if (n < 1 || d < 2 || d % 2 != 0) fail(ErrorCode::Unnormalized, "form must have positive even degree");
  if (n == 1) {
    const double c = form(Vector::Ones(1));
    if (!(c < 0.0)) fail(ErrorCode::Unnormalized, "form must be negative off the origin");
    return std::log(2.0 * std::tgamma(1.0 / d) / d) - std::log(-c) / d;
  }
  // Radial integration: int exp(F) = Gamma(n/d)/d * int_{S^{n-1}} (-F(u))^{-n/d} dS.
  const double expo = -static_cast<double>(n) / d;
  bool bad = false;
  const double sphere = sphere_integral(n, [&](const Vector& u) {
    const double v = -form(u);
    if (!(v > 0.0)) {
      bad = true;
      return 0.0;
    }
    return std::pow(v, expo);
  });
  if (bad || !(sphere > 0.0)) fail(ErrorCode::Unnormalized, "form must be negative off the origin");
  return std::lgamma(static_cast<double>(n) / d) - std::log(static_cast<double>(d)) + std::log(sphere);
}

LimitLaw build_limit_law(const ValidatedModel& model, const MaximumClassification& maximum,
                         bool conditioned, const SolverOptions& opts) {
  if (!conditioned) {
    const PressureResult pr = pressure_limit(model, opts);
    if (pr.maxima.size() > 1) {
      const bool same = std::all_of(pr.maxima.begin(), pr.maxima.end(),
                                    [&](const auto& m) { return m.k == pr.maxima.front().k; });
      if (!same) fail(ErrorCode::MixedTypes, "global maxima have differing types");
      fail(ErrorCode::NonUniqueMaximum, "several global maxima: condition on a ball around one");
    }
    if (!find_point(pr.maxima, maximum.point.x))
      fail(ErrorCode::NonUniqueMaximum, "the given point is not the global maximum");
  }
  if (maximum.k == 1) return GaussianLaw{covariance_tilde(model, maximum)};
  if (!maximum.leading_form) fail(ErrorCode::Internal, "type k >= 2 without a leading form");
  const Vector scale = model.alpha().array().pow(1.0 / (2.0 * maximum.k)).matrix();
  HigherOrderLaw law;
  law.k = maximum.k;
  law.form = maximum.leading_form->rescaled(scale);
  law.log_normalizer = log_integral_exp(law.form);
  return law;
}

DeltaMixtureLaw magnetization_limit_law(const ValidatedModel& model,
                                        const std::vector<MaximumClassification>& maxima) {
  if (maxima.empty()) fail(ErrorCode::Internal, "no maxima given");
  int top = 0;
  for (const auto& m : maxima) top = std::max(top, m.k);
  const Vector d_inv = sqrt_alpha(model).cwiseInverse();
  std::vector<double> logb;
  DeltaMixtureLaw out;
  for (const auto& m : maxima) {
    if (m.k != top) continue;
    double lb = 0.0;
    if (top == 1) {
      const Matrix neg = -(d_inv.asDiagonal() * m.hessian * d_inv.asDiagonal());
      Eigen::LLT<Matrix> llt(neg);
      if (llt.info() != Eigen::Success) fail(ErrorCode::NotAMaximum, "Hessian is not negative definite");
      const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      lb = 0.5 * model.species() * std::log(2.0 * std::numbers::pi) - 0.5 * logdet;
    } else {
      const Vector scale = model.alpha().array().pow(1.0 / (2.0 * top)).matrix();
      lb = log_integral_exp(m.leading_form->rescaled(scale));
    }
    logb.push_back(lb);
    out.points.push_back(m.point.x);
  }
  const double lz = tree_logsumexp(logb);
  for (double lb : logb) out.weights.push_back(std::exp(lb - lz));
  return out;
}

DeltaMixtureLaw magnetization_limit_law(const ValidatedModel& model, const SolverOptions& opts) {
  return magnetization_limit_law(model, pressure_limit(model, opts).maxima);
}

double law_density(const LimitLaw& law, const Vector& x) {
  if (x.size() != law_dimension(law)) fail(ErrorCode::DimensionMismatch, "point dimension differs from the law");
  if (const auto* g = std::get_if<GaussianLaw>(&law)) {
    Eigen::LLT<Matrix> llt(g->cov);
    if (llt.info() != Eigen::Success) fail(ErrorCode::Unnormalized, "covariance is not positive definite");
    const Matrix L = llt.matrixL();
    const Vector z = L.triangularView<Eigen::Lower>().solve(x);
    const double logdet = 2.0 * L.diagonal().array().log().sum();
    return std::exp(-0.5 * z.squaredNorm() - 0.5 * logdet -
                    0.5 * x.size() * std::log(2.0 * std::numbers::pi));
  }
  if (const auto* h = std::get_if<HigherOrderLaw>(&law)) {
    require_normalized(*h);
    return std::exp(h->form(x) - h->log_normalizer);
  }
  fail(ErrorCode::NoDensity, "a mixture of point masses has no density");
}

double law_cdf_1d(const LimitLaw& law, double x) { return cdf(law, x, false); }

double law_cdf_1d_left(const LimitLaw& law, double x) { return cdf(law, x, true); }

double ks_distance(const DiscreteLaw& empirical, const LimitLaw& law) {
  require_1d(law);
  std::vector<double> jumps;
  if (const auto* d = std::get_if<DeltaMixtureLaw>(&law))
    for (const auto& p : d->points) jumps.push_back(p[0]);
  return ks_at_atoms(empirical, [&](double x, bool left) { return cdf(law, x, left); }, jumps);
}

DiscreteLaw empirical_law(std::span<const double> samples) {
  if (samples.empty()) fail(ErrorCode::EmptySample, "no samples");
  DiscreteLaw d;
  d.dim = 1;
  d.points.assign(samples.begin(), samples.end());
  d.probs.assign(samples.size(), 1.0 / static_cast<double>(samples.size()));
  return d.marginal(0);
}

double ks_distance(std::span<const double> samples, const LimitLaw& law) {
  return ks_distance(empirical_law(samples), law);
}

double ks_distance(const DiscreteLaw& a, const DiscreteLaw& b) {
  if (b.dim != 1) fail(ErrorCode::DimensionMismatch, "one-dimensional law required");
  require_normalized(b);
  const DiscreteLaw mb = b.marginal(0);
  std::vector<double> cum(mb.size() + 1, 0.0);
  for (std::size_t i = 0; i < mb.size(); ++i) cum[i + 1] = cum[i] + mb.probs[i];
  auto cdf_b = [&](double x, bool left) {
    const auto it = left ? std::lower_bound(mb.points.begin(), mb.points.end(), x)
                         : std::upper_bound(mb.points.begin(), mb.points.end(), x);
    return cum[static_cast<std::size_t>(it - mb.points.begin())];
  };
  return ks_at_atoms(a, cdf_b, mb.points);
}

}  // namespace meanfield
