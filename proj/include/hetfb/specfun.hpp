#pragma once

namespace hetfb::specfun {

/// Accuracy contract shared by the series-based routines.
/// rel_tol is the series cutoff, abs_tol the guaranteed absolute error.
struct AccuracySpec {
    double rel_tol = 1e-12;
    double abs_tol = 1e-10;

    void validate() const;
};

/// E1(x) = integral_x^inf e^-t / t dt, x > 0.
double exp_integral_e1(double x, const AccuracySpec& acc = {});

/// e^x * E1(x), evaluated without forming either factor for large x.
double scaled_exp_integral_e1(double x, const AccuracySpec& acc = {});

/// Zeroth-order modified Bessel function of the first kind, x >= 0.
double bessel_i0(double x);

/// e^-x * I0(x); finite for every x >= 0.
double bessel_i0_scaled(double x);

/// First-order Marcum Q function Q1(a, b), a, b >= 0.
///
/// Evaluated as the survival function of a noncentral chi-square with two
/// degrees of freedom: a Poisson(a^2/2) mixture of Poisson(b^2/2) CDFs.
/// The Poisson windows are sized from a Chernoff tail bound so that the
/// discarded mass stays below acc.abs_tol / 4 on each side.
double marcum_q1(double a, double b, const AccuracySpec& acc = {});

/// Gauss hypergeometric 2F1(a, b; c; z) by its power series, 0 <= z < 1.
double gauss_2f1(double a, double b, double c, double z, const AccuracySpec& acc = {});

} // namespace hetfb::specfun
