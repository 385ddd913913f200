#include "hetfb/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hetfb/detail/specfun_kernels.hpp"
#include "hetfb/errors.hpp"

namespace hetfb::specfun {

namespace {

// Ascending series is used up to this argument; beyond it the scaled
// asymptotic expansion is accurate to well under 1e-15.
constexpr double i0_series_limit = 30.0;

double i0_series(double x)
{
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-17 * sum) {
            break;
        }
    }
    return sum;
}

// e^-x I0(x) ~ (2 pi x)^-1/2 sum_k ((2k-1)!!)^2 / (k! (8x)^k)
double i0_scaled_asymptotic(double x)
{
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * odd * odd / (8.0 * x * k);
        if (next > term) {
            break; // asymptotic series started to diverge
        }
        term = next;
        sum += term;
        if (term < 1e-17 * sum) {
            break;
        }
    }
    return sum / std::sqrt(2.0 * M_PI * x);
}

// Poisson(mean) probabilities on a window wide enough that the mass left
// outside is below `tail` on each side. Returns the first index.
struct PoissonWindow {
    long first = 0;
    std::vector<double> pmf;
};

PoissonWindow poisson_window(double mean, double tail)
{
    // Chernoff: P(X >= mean + t) <= exp(-t^2 / (2 (mean + t))), and the
    // lower tail is bounded by exp(-t^2 / (2 mean)).
    const double log_inv = std::log(1.0 / tail);
    const double t = log_inv + std::sqrt(log_inv * log_inv + 2.0 * mean * log_inv) + 2.0;
    const auto mode = static_cast<long>(std::floor(mean));
    const long lo = std::max(0L, static_cast<long>(std::floor(mean - t)));
    const auto hi = static_cast<long>(std::ceil(mean + t));

    PoissonWindow w;
    w.first = lo;
    w.pmf.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    const double log_mode = -mean + (mode > 0 ? mode * std::log(mean) : 0.0) -
                            std::lgamma(static_cast<double>(mode) + 1.0);
    w.pmf[static_cast<std::size_t>(mode - lo)] = std::exp(log_mode);
    for (long j = mode + 1; j <= hi; ++j) {
        w.pmf[static_cast<std::size_t>(j - lo)] =
            w.pmf[static_cast<std::size_t>(j - 1 - lo)] * mean / static_cast<double>(j);
    }
    for (long j = mode - 1; j >= lo; --j) {
        w.pmf[static_cast<std::size_t>(j - lo)] =
            w.pmf[static_cast<std::size_t>(j + 1 - lo)] * static_cast<double>(j + 1) / mean;
    }
    return w;
}

void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) {
        throw std::domain_error(std::string(what) + ": argument is not finite");
    }
}

} // namespace

void AccuracySpec::validate() const
{
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw ValidationError("AccuracySpec: tolerances must be positive");
    }
}

double exp_integral_e1(double x, const AccuracySpec& acc)
{
    acc.validate();
    if (std::isnan(x) || x <= 0.0) {
        throw std::domain_error("exp_integral_e1: x must be positive");
    }
    if (x <= detail::e1_series_limit) {
        return detail::e1_series(x, acc.rel_tol * 1e-3);
    }
    if (x > 745.0) {
        return 0.0;
    }
    return std::exp(-x) * detail::e1_scaled_fraction(x, acc.rel_tol * 1e-3);
}

double scaled_exp_integral_e1(double x, const AccuracySpec& acc)
{
    acc.validate();
    if (std::isnan(x) || x <= 0.0) {
        throw std::domain_error("scaled_exp_integral_e1: x must be positive");
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    return detail::e1_scaled(x, acc.rel_tol * 1e-3);
}

double bessel_i0_scaled(double x)
{
    if (std::isnan(x) || x < 0.0) {
        throw std::domain_error("bessel_i0: x must be nonnegative");
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    if (x <= i0_series_limit) {
        return std::exp(-x) * i0_series(x);
    }
    return i0_scaled_asymptotic(x);
}

double bessel_i0(double x)
{
    if (std::isnan(x) || x < 0.0) {
        throw std::domain_error("bessel_i0: x must be nonnegative");
    }
    if (x <= i0_series_limit) {
        return i0_series(x);
    }
    return std::exp(x) * i0_scaled_asymptotic(x);
}

double marcum_q1(double a, double b, const AccuracySpec& acc)
{
    acc.validate();
    require_finite(a, "marcum_q1");
    require_finite(b, "marcum_q1");
    if (a < 0.0 || b < 0.0) {
        throw std::domain_error("marcum_q1: arguments must be nonnegative");
    }
    if (b == 0.0) {
        return 1.0;
    }
    if (a == 0.0) {
        return std::exp(-0.5 * b * b);
    }

    // Q1(a,b) = sum_k P(K = k) P(J <= k), K ~ Poisson(a^2/2), J ~ Poisson(b^2/2).
    // Both Q1 and 1 - Q1 are sums of positive terms; the smaller one is
    // accumulated directly so neither side suffers cancellation.
    const double tail = 0.25 * acc.abs_tol;
    const PoissonWindow outer = poisson_window(0.5 * a * a, tail);
    const PoissonWindow inner = poisson_window(0.5 * b * b, tail);
    const long inner_last = inner.first + static_cast<long>(inner.pmf.size()) - 1;

    std::vector<double> below(inner.pmf.size()); // P(J <= j) restricted to window
    std::vector<double> above(inner.pmf.size()); // P(J > j) restricted to window
    double run = 0.0;
    for (std::size_t i = 0; i < inner.pmf.size(); ++i) {
        run += inner.pmf[i];
        below[i] = run;
    }
    run = 0.0;
    for (std::size_t i = inner.pmf.size(); i-- > 0;) {
        above[i] = run;
        run += inner.pmf[i];
    }

    double q = 0.0;
    double p = 0.0;
    for (std::size_t i = 0; i < outer.pmf.size(); ++i) {
        const long k = outer.first + static_cast<long>(i);
        const double w = outer.pmf[i];
        if (k < inner.first) {
            p += w;
        } else if (k >= inner_last) {
            q += w;
        } else {
            const auto j = static_cast<std::size_t>(k - inner.first);
            q += w * below[j];
            p += w * above[j];
        }
    }
    const double value = q <= p ? q : 1.0 - p;
    return std::clamp(value, 0.0, 1.0);
}

double gauss_2f1(double a, double b, double c, double z, const AccuracySpec& acc)
{
    acc.validate();
    require_finite(z, "gauss_2f1");
    if (z < 0.0 || z >= 1.0) {
        throw std::domain_error("gauss_2f1: z must lie in [0, 1)");
    }
    if (c <= 0.0 && c == std::floor(c)) {
        throw std::domain_error("gauss_2f1: c must not be a nonpositive integer");
    }
    return detail::hyp2f1_series(a, b, c, z, acc.rel_tol * 1e-2);
}

} // namespace hetfb::specfun
