#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/hypergeometric_pFq.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

#include "hetfb/detail/specfun_kernels.hpp"
#include "hetfb/specfun.hpp"

using namespace hetfb::specfun;

namespace {

double e1_by_quadrature(double x)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([](double t) { return std::exp(-t) / t; }, x,
                                std::numeric_limits<double>::infinity());
}

double q1_by_quadrature(double a, double b)
{
    auto f = [a](double t) {
        // t exp(-(t^2+a^2)/2) I0(at) written with the scaled Bessel function
        return t * std::exp(-0.5 * (t - a) * (t - a)) * bessel_i0_scaled(a * t);
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, b, std::numeric_limits<double>::infinity(), 15, 1e-14);
}

double q1_by_noncentral_chi2(double a, double b)
{
    boost::math::non_central_chi_squared dist(2.0, a * a);
    return boost::math::cdf(boost::math::complement(dist, b * b));
}

} // namespace

TEST_CASE("E1 against quadrature oracle")
{
    CHECK(exp_integral_e1(1.0) == doctest::Approx(0.21938393439552).epsilon(1e-12));
    CHECK(exp_integral_e1(0.5) == doctest::Approx(0.55977359477616).epsilon(1e-12));
    for (double x : {1e-6, 1e-3, 0.1, 0.7, 0.999, 1.0, 1.001, 2.0, 5.0, 20.0, 100.0}) {
        CAPTURE(x);
        CHECK(std::abs(exp_integral_e1(x) - e1_by_quadrature(x)) <= 1e-10);
        CHECK(exp_integral_e1(x) == doctest::Approx(boost::math::expint(1, x)).epsilon(1e-12));
    }
    CHECK(exp_integral_e1(700.0) < 1e-300);
    CHECK(exp_integral_e1(800.0) == 0.0);
}

TEST_CASE("E1 bracketing bound e^-x/(x+1) < E1 < e^-x/x")
{
    for (double x = 0.01; x < 50.0; x *= 1.7) {
        CAPTURE(x);
        const double e1 = exp_integral_e1(x);
        CHECK(std::exp(-x) / (x + 1.0) < e1);
        CHECK(e1 < std::exp(-x) / x);
    }
}

TEST_CASE("scaled E1 stays finite where E1 underflows")
{
    for (double x : {0.3, 1.5, 10.0, 700.0, 1e4}) {
        CAPTURE(x);
        const double expected = x < 700.0 ? std::exp(x) * boost::math::expint(1, x)
                                          : 1.0 / (x + 1.0 - 1.0 / (x + 3.0));
        CHECK(scaled_exp_integral_e1(x) == doctest::Approx(expected).epsilon(x < 700.0 ? 1e-12 : 1e-6));
    }
}

TEST_CASE("E1 kernels agree in 113-bit precision")
{
    using quad = boost::multiprecision::cpp_bin_float_quad;
    for (double x : {0.25, 1.0, 3.0, 40.0}) {
        CAPTURE(x);
        const quad v = detail::e1_scaled(quad(x), quad(1e-32));
        CHECK(static_cast<double>(v) ==
              doctest::Approx(scaled_exp_integral_e1(x)).epsilon(1e-13));
    }
}

TEST_CASE("E1 domain errors")
{
    CHECK_THROWS_AS(exp_integral_e1(0.0), std::domain_error);
    CHECK_THROWS_AS(exp_integral_e1(-1.0), std::domain_error);
    CHECK_THROWS_AS(exp_integral_e1(std::nan("")), std::domain_error);
}

TEST_CASE("I0 values")
{
    CHECK(bessel_i0(0.0) == 1.0);
    CHECK(bessel_i0(1.0) == doctest::Approx(1.266065877752).epsilon(1e-11));
    CHECK(bessel_i0(10.0) == doctest::Approx(2815.716628466).epsilon(1e-11));
    for (double x : {0.5, 3.0, 29.9, 30.1, 45.0, 200.0, 700.0}) {
        CAPTURE(x);
        CHECK(bessel_i0(x) == doctest::Approx(boost::math::cyl_bessel_i(0, x)).epsilon(1e-12));
    }
    for (double x : {0.0, 2.0, 31.0, 1e3, 1e6}) {
        CAPTURE(x);
        // e^-x I0(x) = (1/pi) integral_0^pi exp(x (cos t - 1)) dt
        const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                               [x](double t) { return std::exp(x * (std::cos(t) - 1.0)); }, 0.0,
                               M_PI, 20, 1e-14) /
                           M_PI;
        CHECK(bessel_i0_scaled(x) == doctest::Approx(ref).epsilon(1e-10));
    }
    CHECK_THROWS_AS(bessel_i0(-0.1), std::domain_error);
    CHECK_THROWS_AS(bessel_i0_scaled(-0.1), std::domain_error);
}

TEST_CASE("Marcum Q1 special values")
{
    for (double a : {0.0, 0.3, 2.0, 40.0}) {
        CHECK(marcum_q1(a, 0.0) == 1.0);
    }
    CHECK(marcum_q1(0.0, 1.0) == doctest::Approx(0.6065306597126).epsilon(1e-12));
    CHECK(marcum_q1(1.0, 1.0) == doctest::Approx(0.7328798037968).epsilon(1e-11));
}

TEST_CASE("Marcum Q1 against the defining integral and the noncentral chi-square")
{
    for (double a : {0.05, 0.5, 1.0, 3.0, 8.0, 25.0}) {
        for (double b : {0.05, 0.5, 1.0, 3.0, 8.0, 26.0}) {
            CAPTURE(a);
            CAPTURE(b);
            const double q = marcum_q1(a, b);
            CHECK(std::abs(q - q1_by_noncentral_chi2(a, b)) <= 1e-9);
            CHECK(std::abs(q - q1_by_quadrature(a, b)) <= 1e-9);
        }
    }
}

TEST_CASE("Marcum Q1 monotonicity and range")
{
    const double grid[] = {0.0, 0.2, 0.7, 1.5, 3.0, 6.0, 12.0, 30.0};
    for (double a : grid) {
        double prev = 2.0;
        for (double b : grid) {
            const double q = marcum_q1(a, b);
            CHECK(q >= 0.0);
            CHECK(q <= 1.0);
            CHECK(q <= prev + 1e-15);
            prev = q;
        }
    }
    for (double b : grid) {
        double prev = -1.0;
        for (double a : grid) {
            const double q = marcum_q1(a, b);
            CHECK(q >= prev - 1e-15);
            prev = q;
        }
    }
    CHECK_THROWS_AS(marcum_q1(-1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(marcum_q1(1.0, -1.0), std::domain_error);
}

TEST_CASE("2F1 values")
{
    CHECK(gauss_2f1(0.5, 1.0, 1.0, 0.75) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(gauss_2f1(1.7, -0.3, 2.5, 0.0) == 1.0);
    // (1, 3/2; 2; z) = (2/z)((1-z)^-1/2 - 1)
    CHECK(gauss_2f1(1.0, 1.5, 2.0, 0.5) == doctest::Approx(1.6568542494924).epsilon(1e-12));

    struct Family {
        double a, b, c;
    };
    for (Family f : {Family{1, 1.5, 2}, Family{0.5, 1, 1}, Family{1.5, 2, 2}, Family{1, 1.5, 1}}) {
        for (double z : {0.01, 0.3, 0.7, 0.95, 0.999}) {
            CAPTURE(f.a);
            CAPTURE(f.c);
            CAPTURE(z);
            const double ref = boost::math::hypergeometric_pFq({f.a, f.b}, {f.c}, z);
            CHECK(gauss_2f1(f.a, f.b, f.c, z) == doctest::Approx(ref).epsilon(1e-10));
        }
    }
}

TEST_CASE("2F1 reduction (a,b;b;z)(1-z)^a = 1")
{
    for (double a : {0.5, 1.0, 1.5}) {
        for (int i = 0; i <= 9; ++i) {
            const double z = 0.1 * i;
            CHECK(std::abs(gauss_2f1(a, 2.0, 2.0, z) * std::pow(1.0 - z, a) - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("2F1 domain errors")
{
    CHECK_THROWS_AS(gauss_2f1(1, 1, 1, 1.0), std::domain_error);
    CHECK_THROWS_AS(gauss_2f1(1, 1, 1, -0.1), std::domain_error);
    CHECK_THROWS_AS(gauss_2f1(1, 1, -2.0, 0.5), std::domain_error);
}

TEST_CASE("AccuracySpec validation")
{
    AccuracySpec bad;
    bad.rel_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), hetfb::ValidationError);
    CHECK_THROWS_AS(exp_integral_e1(1.0, bad), hetfb::ValidationError);
}
