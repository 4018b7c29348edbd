#include "meanfield/forward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

#include "meanfield/error.hpp"
#include "parallel.hpp"

namespace meanfield {

namespace {

constexpr double kVanishing = 1e-9;      // derivative / eigenvalue threshold
constexpr double kProbeRadius = 1e-4;
constexpr int kProbeDirections = 64;
constexpr int kSphereSamples = 1000;
constexpr double kPolishSwitch = 1e-8;  // damped iteration hands over to Newton here
constexpr int kNewtonIterations = 200;
constexpr double kDegenerateJacobian = 1e-6;
constexpr double kDegenerateRadius = 1e-6;

double cumulant(const ValidatedModel& model, int order, double y) {
  return model.binary() ? log_cosh_derivative(order, y)
                        : model.measure().log_mgf_derivative(order, y);
}

Vector cumulants(const ValidatedModel& model, int order, const Vector& y) {
  Vector out(y.size());
  for (Eigen::Index l = 0; l < y.size(); ++l) out[l] = cumulant(model, order, y[l]);
  return out;
}

void check_dimension(const ValidatedModel& model, const Vector& x) {
  if (x.size() != model.species())
    fail(ErrorCode::DimensionMismatch, "point dimension must equal the species count");
}

// x - map(x) and its Jacobian I - diag(K''(y)) B.
struct FixedPointSystem {
  const ValidatedModel& model;

  Vector residual(const Vector& x) const { return x - mean_field_map(model, x); }

  Matrix jacobian(const Vector& x) const {
    const Vector y = model.effective_field(x);
    const Vector k2 = cumulants(model, 2, y);
    return Matrix::Identity(x.size(), x.size()) - k2.asDiagonal() * model.field_coupling();
  }
};

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Newton polish with a multiplicity-scaled step once convergence turns
// linear (ratio r of successive steps suggests a root of multiplicity
// 1/(1-r), as at the critical point of the Curie-Weiss model).
Vector newton_polish(const FixedPointSystem& sys, Vector x) {
  double prev_step = std::numeric_limits<double>::infinity();
  double prev_ratio = 0.0;
  Vector best = x;
  double best_res = inf_norm(sys.residual(x));
  for (int it = 0; it < kNewtonIterations; ++it) {
    const Vector F = sys.residual(x);
    const double res = inf_norm(F);
    if (res < best_res || (res == best_res && it > 0)) {
      best = x;
      best_res = res;
    }
    if (res == 0.0) break;
    Eigen::FullPivLU<Matrix> lu(sys.jacobian(x));
    if (!lu.isInvertible()) break;
    const Vector step = lu.solve(F);
    if (!step.allFinite()) break;
    const double step_norm = inf_norm(step);
    const double ratio = step_norm / prev_step;
    Vector next = x - step;
    if (ratio > 0.3 && ratio < 0.95 && prev_ratio > 0.3 && prev_ratio < 0.95) {
      const double m = std::round(1.0 / (1.0 - 0.5 * (ratio + prev_ratio)));
      const Vector accelerated = x - m * step;
      if (inf_norm(sys.residual(accelerated)) <= inf_norm(sys.residual(next))) next = accelerated;
    }
    prev_ratio = ratio;
    prev_step = step_norm;
    x = next;
    if (step_norm <= 1e-16 * (1.0 + inf_norm(x))) {
      const double final_res = inf_norm(sys.residual(x));
      if (final_res <= best_res) {
        best = x;
        best_res = final_res;
      }
      break;
    }
  }
  return best;
}

std::vector<Vector> grid_starts(const ValidatedModel& model, const SolverOptions& opts) {
  const int n = model.species();
  const double a = model.measure().min_support();
  const double b = model.measure().max_support();
  const double lo = a + opts.grid_margin * (b - a);
  const double hi = b - opts.grid_margin * (b - a);
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const int G = std::max(opts.grid_points, 1);
  std::vector<double> axis(G);
  for (int i = 0; i < G; ++i)
    axis[i] = G == 1 ? centre : centre + half * static_cast<double>(2 * i - (G - 1)) / (G - 1);

  std::size_t total = 1;
  for (int l = 0; l < n; ++l) total *= static_cast<std::size_t>(G);
  std::vector<Vector> starts;
  starts.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Vector x(n);
    std::size_t rem = idx;
    for (int l = n - 1; l >= 0; --l) {
      x[l] = axis[rem % G];
      rem /= G;
    }
    starts.push_back(std::move(x));
  }
  return starts;
}

bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

// Deterministic pseudo-random unit vectors for probing and sphere sampling.
std::vector<Vector> unit_directions(int n, int count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto uniform = [&gen] { return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53; };
  std::vector<Vector> dirs;
  dirs.reserve(count);
  while (static_cast<int>(dirs.size()) < count) {
    Vector v(n);
    for (int i = 0; i < n; ++i) {
      const double u1 = uniform();
      const double u2 = uniform();
      v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    const double norm = v.norm();
    if (norm > 1e-12) dirs.push_back(v / norm);
  }
  return dirs;
}

void require_local_maximum(const ValidatedModel& model, const Vector& x) {
  const int n = model.species();
  std::vector<Vector> dirs;
  for (int i = 0; i < n; ++i) {
    dirs.push_back(Vector::Unit(n, i));
    dirs.push_back(-Vector::Unit(n, i));
  }
  if (n > 1) {
    for (auto& d : unit_directions(n, kProbeDirections, 0x6d66'7072'6f62'6531ULL)) dirs.push_back(d);
  }
  const double f0 = functional_f(model, x);
  const double tol = 1e-13 * std::max(1.0, std::abs(f0));
  for (const Vector& d : dirs) {
    if (functional_f(model, x + kProbeRadius * d) - f0 > tol)
      fail(ErrorCode::NotAMaximum, "f increases along a probe direction");
  }
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Classification on fbar when J is not positive definite: f then has no
// global maximum and its stationary points are saddles.
MaximumClassification classify_on_fbar(const ValidatedModel& model, const StationaryPoint& point) {
  const Vector& x = point.x;
  Vector curvature(x.size());
  for (Eigen::Index l = 0; l < x.size(); ++l)
    curvature[l] = model.alpha()[l] / (1.0 - x[l] * x[l]);
  Matrix H = model.scaled_coupling();
  H.diagonal() -= curvature;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  if (top > kVanishing) fail(ErrorCode::NotAMaximum, "fbar Hessian has a positive eigenvalue");
  if (top >= -kVanishing)
    fail(ErrorCode::UnsupportedDegeneracy, "degenerate maximum with indefinite coupling");
  MaximumClassification c;
  c.point = point;
  c.k = 1;
  c.hessian = H;
  return c;
}

}  // namespace

double entropy_I(double x) {
  if (!(std::abs(x) <= 1.0)) fail(ErrorCode::DomainError, "entropy_I needs |x| <= 1");
  if (std::abs(x) == 1.0) return std::numbers::ln2;
  return 0.5 * ((1.0 + x) * std::log1p(x) + (1.0 - x) * std::log1p(-x));
}

double functional_fbar(const ValidatedModel& model, const MagnetizationVector& x) {
  check_dimension(model, x);
  if (!model.binary())
    fail(ErrorCode::UnsupportedMeasure, "fbar is defined for symmetric +-1 spins only");
  double entropy = 0.0;
  for (Eigen::Index l = 0; l < x.size(); ++l) entropy += model.alpha()[l] * entropy_I(x[l]);
  return hamiltonian_density(model, x) - entropy;
}

double functional_f(const ValidatedModel& model, const Vector& x) {
  check_dimension(model, x);
  const Vector y = model.effective_field(x);
  double acc = -0.5 * x.dot(model.scaled_coupling() * x);
  for (Eigen::Index l = 0; l < y.size(); ++l) {
    const double k0 = model.binary() ? log_cosh(y[l]) : model.measure().log_mgf(y[l]);
    acc += model.alpha()[l] * k0;
  }
  return acc;
}

Vector gradient_f(const ValidatedModel& model, const Vector& x) {
  check_dimension(model, x);
  const Vector k1 = cumulants(model, 1, model.effective_field(x));
  return model.scaled_coupling() * (k1 - x);
}

Matrix hessian_f(const ValidatedModel& model, const Vector& x) {
  check_dimension(model, x);
  const Vector k2 = cumulants(model, 2, model.effective_field(x));
  const Matrix& B = model.field_coupling();
  const Vector w = model.alpha().cwiseProduct(k2);
  return -model.scaled_coupling() + B.transpose() * w.asDiagonal() * B;
}

MagnetizationVector mean_field_map(const ValidatedModel& model, const MagnetizationVector& x) {
  check_dimension(model, x);
  return cumulants(model, 1, model.effective_field(x));
}

std::vector<StationaryPoint> solve_fixed_points(const ValidatedModel& model,
                                                const SolverOptions& opts) {
  if (!(opts.damping > 0.0 && opts.damping <= 1.0))
    fail(ErrorCode::DomainError, "damping must lie in (0, 1]");
  const FixedPointSystem sys{model};
  const std::vector<Vector> starts = grid_starts(model, opts);
  std::vector<std::optional<StationaryPoint>> found(starts.size());

  detail::parallel_for(starts.size(), opts.threads, [&](std::size_t i) {
    Vector x = starts[i];
    for (int it = 0; it < opts.max_iterations; ++it) {
      const Vector mapped = mean_field_map(model, x);
      if (inf_norm(x - mapped) <= kPolishSwitch) break;
      x = (1.0 - opts.damping) * x + opts.damping * mapped;
    }
    x = newton_polish(sys, x);
    const double res = inf_norm(sys.residual(x));
    if (!(res <= opts.tolerance)) return;
    StationaryPoint p;
    p.x = x;
    p.residual = res;
    p.f_value = functional_f(model, x);
    if (model.binary()) p.fbar_value = functional_fbar(model, x);
    found[i] = std::move(p);
  });

  // Merge in start order. Each cluster keeps its lowest-residual member,
  // except around a singular Jacobian: there the residual vanishes in double
  // precision on a whole neighbourhood of the root, so members within
  // kDegenerateRadius are pooled and replaced by their mean.
  auto singular = [&](const Vector& x) {
    Eigen::JacobiSVD<Matrix> svd(sys.jacobian(x));
    return svd.singularValues().minCoeff() <= kDegenerateJacobian;
  };
  struct Cluster {
    StationaryPoint best;
    std::vector<Vector> members;
    bool degenerate = false;
  };
  std::vector<Cluster> pool;
  for (auto& p : found) {
    if (!p) continue;
    const bool deg = singular(p->x);
    bool merged = false;
    for (auto& c : pool) {
      const double d = inf_norm(c.best.x - p->x);
      if (d <= opts.dedup_radius || (deg && c.degenerate && d <= kDegenerateRadius)) {
        if (p->residual < c.best.residual) c.best = *p;
        c.members.push_back(p->x);
        merged = true;
        break;
      }
    }
    if (!merged) pool.push_back({*p, {p->x}, deg});
  }
  std::vector<StationaryPoint> clusters;
  for (auto& c : pool) {
    if (c.degenerate && c.members.size() > 1) {
      Vector mean = Vector::Zero(c.best.x.size());
      for (const auto& m : c.members) mean += m;
      mean /= static_cast<double>(c.members.size());
      const double res = inf_norm(sys.residual(mean));
      if (res <= opts.tolerance) {
        c.best.x = mean;
        c.best.residual = res;
        c.best.f_value = functional_f(model, mean);
        if (model.binary()) c.best.fbar_value = functional_fbar(model, mean);
      }
    }
    clusters.push_back(std::move(c.best));
  }
  if (clusters.empty()) fail(ErrorCode::NoConvergence, "no start converged to a fixed point");
  std::sort(clusters.begin(), clusters.end(),
            [](const StationaryPoint& a, const StationaryPoint& b) { return lex_less(a.x, b.x); });
  return clusters;
}

MaximumClassification classify_maximum(const ValidatedModel& model, const StationaryPoint& point) {
  check_dimension(model, point.x);
  const int n = model.species();
  const Vector& x = point.x;
  require_local_maximum(model, x);

  MaximumClassification c;
  c.point = point;
  c.hessian = hessian_f(model, x);
  const Vector y = model.effective_field(x);

  if (n == 1) {
    const double J = model.J()(0, 0);
    for (int order = 2; order <= kMaxDerivativeOrder; order += 2) {
      const double d = order == 2 ? c.hessian(0, 0)
                                  : std::pow(J, order) * cumulant(model, order, y[0]);
      if (std::abs(d) <= kVanishing) continue;
      if (d > 0.0) fail(ErrorCode::NotAMaximum, "leading even derivative is positive");
      c.k = order / 2;
      c.strength = d;
      if (c.k >= 2) {
        c.leading_form = HomogeneousForm(1, order, {{{order}, d / factorial(order)}});
      }
      return c;
    }
    fail(ErrorCode::UnsupportedDegeneracy, "all even derivatives up to order 8 vanish");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(c.hessian, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  if (ev.maxCoeff() < -kVanishing) {
    c.k = 1;
    return c;
  }
  if (ev.maxCoeff() > kVanishing) fail(ErrorCode::NotAMaximum, "Hessian has a positive eigenvalue");
  if (ev.cwiseAbs().maxCoeff() > kVanishing)
    fail(ErrorCode::UnsupportedDegeneracy,
         "Hessian singular but nonzero: mixed homogeneity is not supported");

  const Vector weights = model.alpha().cwiseProduct(cumulants(model, 4, y));
  HomogeneousForm quartic = HomogeneousForm::power_sum(model.field_coupling(), weights, 4);
  for (const Vector& u : unit_directions(n, kSphereSamples, 0x7175'6172'7469'6331ULL)) {
    if (!(quartic(u) < -kVanishing))
      fail(ErrorCode::UnsupportedDegeneracy, "quartic form is not negative on the unit sphere");
  }
  c.k = 2;
  c.leading_form = std::move(quartic);
  return c;
}

bool coupling_positive_definite(const ValidatedModel& model) {
  Eigen::LLT<Matrix> llt(model.symmetric_coupling());
  return llt.info() == Eigen::Success;
}

double maximize_f(const ValidatedModel& model, const SolverOptions& opts) {
  if (!coupling_positive_definite(model))
    fail(ErrorCode::NonPositiveDefiniteA, "f is unbounded above unless J is positive definite");
  const std::vector<Vector> starts = grid_starts(model, opts);
  std::vector<double> best(starts.size(), -std::numeric_limits<double>::infinity());

  detail::parallel_for(starts.size(), opts.threads, [&](std::size_t i) {
    Vector x = starts[i];
    double fx = functional_f(model, x);
    for (int it = 0; it < 500; ++it) {
      const Vector g = gradient_f(model, x);
      if (inf_norm(g) < 1e-15) break;
      Vector dir = g;
      Eigen::LDLT<Matrix> ldlt(-hessian_f(model, x));
      if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
          (ldlt.vectorD().array() > 0.0).all()) {
        dir = ldlt.solve(g);
      }
      const double slope = g.dot(dir);
      double t = 1.0;
      double taken = 0.0;
      while (t > 1e-12) {
        const Vector trial = x + t * dir;
        const double ft = functional_f(model, trial);
        if (ft >= fx + 1e-4 * t * slope) {
          x = trial;
          fx = ft;
          taken = inf_norm(t * dir);
          break;
        }
        t *= 0.5;
      }
      if (taken < 1e-15) break;
    }
    best[i] = fx;
  });
  return *std::max_element(best.begin(), best.end());
}

PressureResult pressure_limit(const ValidatedModel& model, const SolverOptions& opts) {
  PressureResult result;
  result.stationary_points = solve_fixed_points(model, opts);
  const bool positive_definite = coupling_positive_definite(model);
  if (!model.binary() && !positive_definite)
    fail(ErrorCode::UnsupportedMeasure,
         "general site measures need a positive definite J for the pressure limit");

  auto value = [&](const StationaryPoint& p) {
    return model.binary() ? *p.fbar_value : p.f_value;
  };
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& p : result.stationary_points) top = std::max(top, value(p));
  result.limit_value = top;

  for (const auto& p : result.stationary_points) {
    if (value(p) < top - 1e-9) continue;
    MaximumClassification c =
        positive_definite ? classify_maximum(model, p) : classify_on_fbar(model, p);
    c.is_global = true;
    result.maxima.push_back(std::move(c));
  }
  if (positive_definite && model.binary())
    result.method_agreement = std::abs(maximize_f(model, opts) - top);
  return result;
}

std::vector<PhaseRow> cw_phase_scan(std::span<const double> J_grid, double h,
                                    const SolverOptions& opts) {
  std::vector<PhaseRow> rows;
  for (std::size_t i = 0; i < J_grid.size(); ++i) {
    if (!(J_grid[i] > 0.0)) fail(ErrorCode::DomainError, "couplings in a phase scan must be positive");
    if (i > 0 && !(J_grid[i] > J_grid[i - 1]))
      fail(ErrorCode::DomainError, "phase scan grid must be strictly ascending");
  }
  for (double J : J_grid) {
    const PressureResult pr = pressure_limit(curie_weiss(J, h), opts);
    PhaseRow row;
    row.J = J;
    row.pressure = pr.limit_value;
    row.magnetization = -std::numeric_limits<double>::infinity();
    for (const auto& m : pr.maxima) row.magnetization = std::max(row.magnetization, m.point.x[0]);
    row.dp_dJ = 0.5 * row.magnetization * row.magnetization;
    rows.push_back(row);
  }
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    const double left = rows[i].J - rows[i - 1].J;
    const double right = rows[i + 1].J - rows[i].J;
    const double slope_right = (rows[i + 1].pressure - rows[i].pressure) / right;
    const double slope_left = (rows[i].pressure - rows[i - 1].pressure) / left;
    rows[i].second_difference = 2.0 * (slope_right - slope_left) / (left + right);
  }
  return rows;
}

}  // namespace meanfield
