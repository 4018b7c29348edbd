#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "meanfield/error.hpp"
#include "meanfield/exact.hpp"
#include "meanfield/forward.hpp"
#include "meanfield/limits.hpp"
#include "models.hpp"
#include "oracles.hpp"

using namespace meanfield;
using namespace testmodels;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

constexpr double kFree = 1e-300;

// mu(h) from the solver: the unique global maximizer.
Vector solved_mu(const Vector& alpha, const Matrix& J, const Vector& h) {
  const PressureResult r = pressure_limit(validate_model(spec(alpha, J, h)));
  REQUIRE(r.maxima.size() == 1);
  return r.maxima[0].point.x;
}

double quad(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14);
}

}  // namespace

TEST_SUITE("limits") {
  TEST_CASE("Curie-Weiss susceptibility") {
    CHECK(susceptibility_cw(0.0, 0.0, 0.0) == 1.0);
    CHECK(susceptibility_cw(0.5, 0.0, 0.0) == 2.0);
    CHECK(code_of([] { susceptibility_cw(1.0, 0.0, 0.0); }) == ErrorCode::DegenerateMaximum);
    CHECK(susceptibility_cw(0.999, 0.0, 0.0) * (1 - 0.999) == doctest::Approx(1.0).epsilon(0.01));
  }

  TEST_CASE("susceptibility matrix") {
    const ValidatedModel free = two_species(0.5, mat({{kFree, 0}, {0, kFree}}), vec({0.3, 0.1}));
    const Vector mu = vec({0.3, -0.5});
    const Matrix chi0 = susceptibility_matrix(free, mu);
    CHECK(chi0(0, 0) == doctest::Approx(1 - 0.09).epsilon(1e-15));
    CHECK(chi0(1, 1) == doctest::Approx(1 - 0.25).epsilon(1e-15));
    CHECK(chi0(0, 1) == 0.0);

    for (double J : {0.3, 0.8, 1.4}) {
      const double m = oracle::bisect_mu(J, 0.2);
      CHECK(std::abs(susceptibility_matrix(curie_weiss(J, 0.2), vec({m}))(0, 0) - susceptibility_cw(J, 0.2, m)) <=
            1e-12);
    }

    // finite differences of the solved magnetization in h
    const ValidatedModel ref = reference();
    const Vector mu_ref = solved_mu(ref.alpha(), ref.J(), ref.h());
    const Matrix chi = susceptibility_matrix(ref, mu_ref);
    for (int s = 0; s < 2; ++s) {
      Vector hp = ref.h();
      Vector hm = ref.h();
      hp[s] += 1e-6;
      hm[s] -= 1e-6;
      const Vector d = (solved_mu(ref.alpha(), ref.J(), hp) - solved_mu(ref.alpha(), ref.J(), hm)) / 2e-6;
      for (int l = 0; l < 2; ++l) CHECK(d[l] == doctest::Approx(chi(l, s)).epsilon(1e-5));
    }

    // the defining relation and reciprocity
    const Matrix P = (1.0 - mu_ref.array().square()).matrix().asDiagonal();
    const Matrix D2 = ref.alpha().asDiagonal();
    CHECK((chi - P * (Matrix::Identity(2, 2) + ref.J() * D2 * chi)).cwiseAbs().maxCoeff() <= 1e-10);
    const Matrix R = D2 * chi;
    CHECK((R - R.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(chi(0, 0) > 0.0);
    CHECK(chi(1, 1) > 0.0);

    const ValidatedModel crit = curie_weiss(1.0, 0.0);
    CHECK(code_of([&] { susceptibility_matrix(crit, vec({0.0})); }) == ErrorCode::SingularSystem);
  }

  TEST_CASE("one-species identity chi = (-lambda)^-1 - J^-1") {
    for (double J = 0.2; J < 0.95; J += 0.1) {
      for (double h = -1.0; h <= 1.0001; h += 0.25) {
        const ValidatedModel m = curie_weiss(J, h);
        const PressureResult r = pressure_limit(m);
        REQUIRE(r.maxima.size() == 1);
        const double mu = r.maxima[0].point.x[0];
        const double chi = susceptibility_cw(J, h, mu);
        const double lambda = *r.maxima[0].strength;
        CHECK(std::abs(chi - (1.0 / -lambda - 1.0 / J)) <= 1e-10);
        CHECK(std::abs(covariance_tilde(m, r.maxima[0])(0, 0) - chi) <= 1e-10 * chi);
      }
    }
  }

  TEST_CASE("covariance tilde") {
    const ValidatedModel ref = reference();
    const PressureResult r = pressure_limit(ref);
    REQUIRE(r.maxima.size() == 1);
    const Matrix cov = covariance_tilde(ref, r.maxima[0]);
    const Matrix chi = susceptibility_matrix(ref, r.maxima[0].point.x);
    CHECK((cov - cov.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    for (int l = 0; l < 2; ++l) CHECK(std::abs(cov(l, l) - chi(l, l)) <= 1e-9);
    const auto display = susceptibility_display(chi);
    REQUIRE(display);
    CHECK(std::abs(std::abs(cov(0, 1)) - std::abs((*display)(0, 1))) <= 1e-9);
    CHECK((cov - rescaled_susceptibility(ref, chi)).cwiseAbs().maxCoeff() <= 1e-12);

    // unequal species sizes
    const ValidatedModel skew = two_species(0.3, mat({{1.5, -0.4}, {-0.4, 0.8}}), vec({0.1, 0.2}));
    const PressureResult rs = pressure_limit(skew);
    const Matrix cs = covariance_tilde(skew, rs.maxima[0]);
    const Matrix chis = susceptibility_matrix(skew, rs.maxima[0].point.x);
    for (int l = 0; l < 2; ++l) CHECK(std::abs(cs(l, l) - chis(l, l)) <= 1e-9);
    CHECK(std::abs(std::abs(cs(0, 1)) - std::sqrt(chis(0, 1) * chis(1, 0))) <= 1e-9);
    CHECK(cs(0, 1) < 0.0);
  }

  TEST_CASE("covariance tilde preconditions") {
    const PressureResult crit = pressure_limit(curie_weiss(1.0, 0.0));
    CHECK(code_of([&] { covariance_tilde(curie_weiss(1.0, 0.0), crit.maxima[0]); }) == ErrorCode::NotK1);

    const ValidatedModel anti = two_species(0.5, mat({{1.0, -2.0}, {-2.0, 1.0}}), vec({0.1, 0.0}));
    const PressureResult r = pressure_limit(anti);
    MaximumClassification c = r.maxima[0];
    CHECK(code_of([&] { covariance_tilde(anti, c); }) == ErrorCode::NonPositiveDefiniteA);

    // a saddle passed off as a maximum gives an indefinite result
    const ValidatedModel cw = curie_weiss(1.2, 0.0);
    MaximumClassification fake;
    fake.k = 1;
    fake.point.x = vec({0.0});
    fake.hessian = hessian_f(cw, fake.point.x);
    CHECK(code_of([&] { covariance_tilde(cw, fake); }) == ErrorCode::NotPositiveDefiniteResult);
  }

  TEST_CASE("square-root display is undefined for opposite-sign responses") {
    CHECK_FALSE(susceptibility_display(mat({{1.0, 0.2}, {-0.3, 1.0}})));
  }

  TEST_CASE("limit law construction") {
    const ValidatedModel crit = curie_weiss(1.0, 0.0);
    const PressureResult rc = pressure_limit(crit);
    const LimitLaw quartic = build_limit_law(crit, rc.maxima[0], false);
    REQUIRE(std::holds_alternative<HigherOrderLaw>(quartic));
    const auto& ho = std::get<HigherOrderLaw>(quartic);
    CHECK(ho.k == 2);
    CHECK(ho.form(vec({1.0})) == doctest::Approx(-1.0 / 12.0).epsilon(1e-12));
    const double z = quad([](double x) { return std::exp(-std::pow(x, 4) / 12.0); }, -12.0, 12.0);
    CHECK(ho.log_normalizer == doctest::Approx(std::log(z)).epsilon(1e-12));

    const ValidatedModel two_wells = curie_weiss(1.2, 0.0);
    const DeltaMixtureLaw mix = magnetization_limit_law(two_wells);
    REQUIRE(mix.points.size() == 2);
    const double mu0 = oracle::bisect_mu(1.2, 0.0);
    CHECK(mix.points[0][0] == doctest::Approx(-mu0).epsilon(1e-10));
    CHECK(mix.points[1][0] == doctest::Approx(mu0).epsilon(1e-10));
    CHECK(mix.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mix.weights[1] == doctest::Approx(0.5).epsilon(1e-12));
    const PressureResult rw = pressure_limit(two_wells);
    CHECK(code_of([&] { build_limit_law(two_wells, rw.maxima[1], false); }) == ErrorCode::NonUniqueMaximum);
    const LimitLaw cond = build_limit_law(two_wells, rw.maxima[1], true);
    CHECK(std::get<GaussianLaw>(cond).cov(0, 0) == doctest::Approx(susceptibility_cw(1.2, 0, mu0)).epsilon(1e-10));

    for (double J : {0.5, 1.2}) {
      const ValidatedModel m = curie_weiss(J, 0.3);
      const PressureResult r = pressure_limit(m);
      const LimitLaw g = build_limit_law(m, r.maxima[0], false);
      REQUIRE(std::holds_alternative<GaussianLaw>(g));
      const double mu = oracle::bisect_mu(J, 0.3);
      CHECK(std::get<GaussianLaw>(g).cov(0, 0) == doctest::Approx(susceptibility_cw(J, 0.3, mu)).epsilon(1e-10));
    }

    const DeltaMixtureLaw single = magnetization_limit_law(reference());
    CHECK(single.points.size() == 1);
    CHECK(single.weights[0] == 1.0);
  }

  TEST_CASE("multi-species higher-order law") {
    const ValidatedModel crit = two_species(0.5, mat({{2.0, 0.0}, {0.0, 2.0}}), vec({0.0, 0.0}));
    const PressureResult r = pressure_limit(crit);
    const LimitLaw law = build_limit_law(crit, r.maxima[0], false);
    const auto& ho = std::get<HigherOrderLaw>(law);
    // f_4(x / alpha^{1/4}) = -(x1^4 + x2^4) / 12: a product of two critical laws
    CHECK(ho.form(vec({1.0, 0.0})) == doctest::Approx(-1.0 / 12.0).epsilon(1e-12));
    const double z1 = quad([](double x) { return std::exp(-std::pow(x, 4) / 12.0); }, -12.0, 12.0);
    CHECK(ho.log_normalizer == doctest::Approx(2 * std::log(z1)).epsilon(1e-9));
  }

  TEST_CASE("log normalizer of homogeneous forms") {
    // non-separable quartic in two variables against nested quadrature
    const HomogeneousForm f(2, 4, {{{4, 0}, -1.0}, {{2, 2}, -0.5}, {{1, 3}, 0.3}, {{0, 4}, -2.0}});
    const double inner_box = 6.0;
    const double z = quad(
        [&](double x) {
          return quad([&](double y) { return std::exp(f(vec({x, y}))); }, -inner_box, inner_box);
        },
        -inner_box, inner_box);
    CHECK(log_integral_exp(f) == doctest::Approx(std::log(z)).epsilon(1e-10));
    // three separable sextic factors
    const HomogeneousForm g(3, 6, {{{6, 0, 0}, -1.0}, {{0, 6, 0}, -2.0}, {{0, 0, 6}, -0.5}});
    double expect = 0.0;
    for (double c : {1.0, 2.0, 0.5})
      expect += std::log(2.0 * std::tgamma(1.0 / 6.0) / 6.0) - std::log(c) / 6.0;
    CHECK(log_integral_exp(g) == doctest::Approx(expect).epsilon(1e-10));
    const HomogeneousForm bad(2, 4, {{{4, 0}, -1.0}, {{0, 4}, 1.0}});
    CHECK(code_of([&] { log_integral_exp(bad); }) == ErrorCode::Unnormalized);
  }

  TEST_CASE("densities and distribution functions") {
    const LimitLaw g{GaussianLaw{mat({{1.0}})}};
    CHECK(law_density(g, vec({0.0})) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-15));
    CHECK(law_cdf_1d(g, 0.0) == 0.5);
    CHECK(law_cdf_1d(g, 1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));

    HigherOrderLaw q{2, HomogeneousForm(1, 4, {{{4}, -1.0 / 12.0}}), 0.0};
    q.log_normalizer = log_integral_exp(q.form);
    const LimitLaw ql{q};
    for (double x : {0.3, 1.0, 2.7}) {
      CHECK(std::abs(law_density(ql, vec({x})) - law_density(ql, vec({-x}))) <= 1e-12);
      const double mass = quad([&](double t) { return law_density(ql, vec({t})); }, -12.0, x);
      CHECK(law_cdf_1d(ql, x) == doctest::Approx(mass).epsilon(1e-10));
      CHECK(law_cdf_1d(ql, -x) == doctest::Approx(1.0 - mass).epsilon(1e-10));
    }

    const LimitLaw mix{DeltaMixtureLaw{{vec({-1.0}), vec({2.0})}, {0.25, 0.75}}};
    CHECK(law_cdf_1d(mix, -1.0) == 0.25);
    CHECK(law_cdf_1d_left(mix, -1.0) == 0.0);
    CHECK(law_cdf_1d(mix, 5.0) == 1.0);
    CHECK(code_of([&] { law_density(mix, vec({0.0})); }) == ErrorCode::NoDensity);
    CHECK(code_of([&] { law_density(g, vec({0.0, 1.0})); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { law_cdf_1d(LimitLaw{GaussianLaw{Matrix::Identity(2, 2)}}, 0.0); }) ==
          ErrorCode::DimensionMismatch);
    const LimitLaw heavy{DeltaMixtureLaw{{vec({0.0})}, {0.7}}};
    CHECK(code_of([&] { law_cdf_1d(heavy, 1.0); }) == ErrorCode::Unnormalized);
  }

  TEST_CASE("Kolmogorov-Smirnov distance") {
    DiscreteLaw d;
    d.dim = 1;
    d.points = {-1.0, 0.5, 2.0};
    d.probs = {0.2, 0.3, 0.5};
    CHECK(ks_distance(d, d) == 0.0);
    const LimitLaw as_mixture{DeltaMixtureLaw{{vec({-1.0}), vec({0.5}), vec({2.0})}, {0.2, 0.3, 0.5}}};
    CHECK(ks_distance(d, as_mixture) == doctest::Approx(0.0).epsilon(1e-15));
    DiscreteLaw shifted = d;
    shifted.probs = {0.3, 0.2, 0.5};
    CHECK(ks_distance(d, shifted) == doctest::Approx(0.1).epsilon(1e-12));

    const std::vector<double> samples{0.0};
    CHECK(ks_distance(samples, LimitLaw{GaussianLaw{mat({{1.0}})}}) == doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("finite-N variance approaches the Gaussian limit") {
    for (const auto& [J, h] : {std::pair{0.5, 0.0}, std::pair{0.7, 0.2}, std::pair{1.5, 0.1}}) {
      const ValidatedModel m = curie_weiss(J, h);
      const PressureResult r = pressure_limit(m);
      REQUIRE(r.maxima.size() == 1);
      const double var = std::get<GaussianLaw>(build_limit_law(m, r.maxima[0], false)).cov(0, 0);
      const DiscreteLaw exact = normalized_sum_law(m, {2000}, r.maxima[0].point.x, 1);
      CHECK(exact.covariance()(0, 0) == doctest::Approx(var).epsilon(0.05));
    }
  }
}
