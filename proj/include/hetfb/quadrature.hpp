#pragma once

#include <functional>

namespace hetfb::numerics {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
};

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_intervals = 4000;
};

using Integrand = std::function<double(double)>;

// Globally adaptive 7/15-point Gauss-Kronrod rule on [lo, hi].
// Throws NumericalError when the interval budget is exhausted before the
// error estimate drops below max(abs_tol, rel_tol * |value|).
QuadratureResult integrate(const Integrand& f, double lo, double hi,
                           const QuadratureOptions& opts = {});

// Integral over [lo, inf) for integrands with exponential-type decay.
// Panels of doubling width are integrated in turn; the walk stops once it
// has passed lo + min_extent and a panel contributes less than abs_tol/100.
// min_extent must cover the bulk of the integrand, the walk cannot detect
// mass hiding behind a flat stretch.
QuadratureResult integrate_to_infinity(const Integrand& f, double lo, double min_extent,
                                       const QuadratureOptions& opts = {});

/// Neumaier-compensated running sum.
template <typename T>
class CompensatedSum {
public:
    void add(const T& x)
    {
        const T t = sum_ + x;
        if (abs_of(sum_) >= abs_of(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    T value() const { return sum_ + comp_; }

private:
    static T abs_of(const T& v) { return v < T(0) ? T(-v) : v; }
    T sum_{0};
    T comp_{0};
};

} // namespace hetfb::numerics
