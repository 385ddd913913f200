#pragma once

// Precision-generic kernels behind the double API in specfun.hpp. The
// closed-form alternating sums evaluate these in 113-bit floating point.

#include <cmath>
#include <limits>

#include <boost/math/constants/constants.hpp>

#include "hetfb/errors.hpp"

namespace hetfb::specfun::detail {

// Crossover between the ascending series and the continued fraction.
inline constexpr double e1_series_limit = 1.0;

template <typename T>
T e1_series(const T& x, const T& tol)
{
    using std::abs;
    using std::log;
    // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    T power = T(1);
    T sum = T(0);
    for (int k = 1; k < 10000; ++k) {
        power *= -x / T(k);
        const T term = power / T(k);
        sum += term;
        if (abs(term) <= tol * abs(sum)) {
            return -boost::math::constants::euler<T>() - log(x) - sum;
        }
    }
    throw NumericalError("exp_integral_e1: series did not converge");
}

// Modified Lentz evaluation of e^x E1(x) for x > 1.
template <typename T>
T e1_scaled_fraction(const T& x, const T& tol)
{
    using std::abs;
    const T tiny = T(1e-300);
    T b = x + T(1);
    T c = T(1) / tiny;
    T d = T(1) / b;
    T h = d;
    for (int i = 1; i < 100000; ++i) {
        const T an = T(-i) * T(i);
        b += T(2);
        d = T(1) / (an * d + b);
        c = b + an / c;
        const T delta = c * d;
        h *= delta;
        if (abs(delta - T(1)) <= tol) {
            return h;
        }
    }
    throw NumericalError("exp_integral_e1: continued fraction did not converge");
}

template <typename T>
T e1_scaled(const T& x, const T& tol)
{
    using std::exp;
    if (x <= T(e1_series_limit)) {
        return exp(x) * e1_series(x, tol);
    }
    return e1_scaled_fraction(x, tol);
}

// Power series of 2F1(a, b; c; z), 0 <= z < 1. Terminates when the
// geometric bound on the remaining tail falls below tol * |sum|.
template <typename T>
T hyp2f1_series(const T& a, const T& b, const T& c, const T& z, const T& tol)
{
    using std::abs;
    T term = T(1);
    T sum = T(1);
    if (z == T(0)) {
        return sum;
    }
    for (long k = 0; k < 50'000'000L; ++k) {
        const T kk = T(k);
        const T ratio = (a + kk) * (b + kk) / ((c + kk) * (kk + T(1))) * z;
        term *= ratio;
        sum += term;
        if (term == T(0)) {
            return sum;
        }
        T bound = abs(ratio);
        if (bound < z) {
            bound = z;
        }
        if (bound < T(1) && abs(term) * bound / (T(1) - bound) <= tol * abs(sum)) {
            return sum;
        }
    }
    throw NumericalError("gauss_2f1: power series did not converge");
}

} // namespace hetfb::specfun::detail
