#pragma once

#include <optional>
#include <vector>

#include "hetfb/analytic.hpp"
#include "hetfb/system.hpp"

namespace hetfb::goodput {

using analytic::Path;

/// Rate-adaptation parameters: fixed-rate CQI threshold and variable-rate
/// backoff factor.
struct StrategyParams {
    double beta0 = 1.0; // >= 0
    double beta1 = 0.5; // in [0, 1]

    void validate() const;
};

/// How the variable-rate goodput integral is evaluated.
enum class RateMode { quadrature, jensen };

/// Constants of the imperfect-feedback closed forms for threshold or
/// backoff a. Per order l:
///   zeta = 2(l+1)/mu, phi = varpi^2 + vartheta^2 + zeta,
///   psi = varpi^2 - vartheta^2 + zeta, varsigma = sqrt(phi^2 - 4 varpi^2 vartheta^2),
/// with mu = 1 - sigma_w^2 the mean of the estimated CQI.
struct IntegralArgs {
    IntegralArgs(double a, const ImpairmentParams& imp);

    double a;
    double alpha_w;
    double varpi;    // alpha_w alpha
    double vartheta; // alpha_w sqrt(a)
    double mean;

    double zeta(int l) const { return 2.0 * (l + 1) / mean; }
    double phi(int l) const { return varpi * varpi + vartheta * vartheta + zeta(l); }
    double psi(int l) const { return varpi * varpi - vartheta * vartheta + zeta(l); }
    double varsigma(int l) const;
    /// Argument 4 varpi^2 vartheta^2 / phi^2 of the hypergeometric terms; < 1.
    double hyper_arg(int l) const;
};

// Expectations over chi, the maximum of b i.i.d. estimated CQIs
// (exponential with mean mu each). Expansion evaluates the finite
// alternating sums, quadrature integrates the defining expectation;
// automatic uses the sums up to b = 60.

/// P(actual CQI > a) = E[Q1(varpi sqrt(chi), vartheta)].
double i2(double a, int b, const ImpairmentParams& imp, Path path = Path::automatic);

/// P(actual CQI > a chi) = E[Q1(varpi sqrt(chi), alpha_w sqrt(a chi))].
double i4(double a, int b, const ImpairmentParams& imp, Path path = Path::automatic);

/// E[Q1(varpi sqrt(chi), alpha_w sqrt(a chi)) log2(1 + snr a chi)], 0 <= a <= 1.
double i3_quadrature(double a, int b, const ImpairmentParams& imp, double snr);

/// i3 with log2(1 + y) replaced by y / ln 2; an upper bound, tight at low SNR.
double i3_upper_bound(double a, int b, const ImpairmentParams& imp, double snr,
                      Path path = Path::automatic);

/// E[chi] = mu H_b.
double jensen_mean(int b, const ImpairmentParams& imp);

/// i3 integrand evaluated at E[chi].
double i3_jensen(double a, int b, const ImpairmentParams& imp, double snr);

/// True when x -> Q1(varpi sqrt(x), alpha_w sqrt(a x)) log2(1 + snr a x) is
/// nondecreasing and concave on [1e-6 mu, 40 mu], judged from the chord
/// slopes over 600 log-spaced points. Then i3_jensen bounds i3 from above
/// for every b.
bool jensen_integrand_concave(double a, const ImpairmentParams& imp, double snr);

struct BackoffInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Backoffs step, 2 step, ..., 1 passing jensen_integrand_concave, merged
/// into runs of consecutive grid points. The set need not start at 0: at
/// low SNR the Q1 dip makes the integrand locally convex for small a.
std::vector<BackoffInterval> jensen_concavity_region(const ImpairmentParams& imp, double snr, double step = 0.01);

struct Metrics {
    double goodput = 0.0; // bits/s/Hz per resource block
    double outage = 0.0;  // P(block scheduled and transmission fails)
};

/// Fixed rate log2(1 + snr beta0); outage when the actual CQI is <= beta0.
Metrics fixed_rate_metrics(const SystemConfig& sys, const ImpairmentParams& imp, double beta0,
                           Path path = Path::automatic);

/// Rate log2(1 + snr beta1 chi); outage when the actual CQI is <= beta1 chi.
/// Jensen mode needs the expansion (full feedback or a well-conditioned
/// partial-feedback system) and throws NumericalError otherwise.
Metrics variable_rate_metrics(const SystemConfig& sys, const ImpairmentParams& imp, double beta1,
                              RateMode mode = RateMode::quadrature, Path path = Path::automatic);

struct Beta1Optimum {
    double beta1 = 0.0;
    double goodput = 0.0; // Jensen goodput at full feedback
    int matched_m = 0;    // smallest M reaching gamma of the full-feedback sum rate; 0 if not asked
};

struct Beta0Optimum {
    double beta0 = 0.0;
    double goodput = 0.0; // fixed-rate goodput at full feedback
    int matched_m = 0;
};

/// Maximizes the full-feedback Jensen goodput over beta1 in [0, 1]
/// (golden section, then one Newton step), then picks M for the sum-rate
/// fraction gamma. Without gamma the M search is skipped.
Beta1Optimum optimize_beta1(const SystemConfig& sys, const ImpairmentParams& imp,
                            std::optional<double> gamma = 0.99);

/// Maximizes the full-feedback fixed-rate goodput over beta0 >= 0: a grid
/// scan over [0, mu (ln K + 6)], doubled while the best point is the right
/// end, then golden section around the best grid point.
Beta0Optimum optimize_beta0(const SystemConfig& sys, const ImpairmentParams& imp,
                            std::optional<double> gamma = 0.99);

} // namespace hetfb::goodput
