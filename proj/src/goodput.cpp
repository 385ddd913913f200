#include "hetfb/goodput.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "hetfb/detail/specfun_kernels.hpp"
#include "hetfb/errors.hpp"
#include "hetfb/quadrature.hpp"
#include "hetfb/specfun.hpp"

namespace hetfb::goodput {

namespace mp = boost::multiprecision;

namespace {

constexpr int closed_form_max_order = 60;
constexpr numerics::QuadratureOptions quad_opts{1e-12, 1e-11, 8000};
constexpr specfun::AccuracySpec q1_acc{1e-15, 1e-15};

void require_order(int b, const char* what)
{
    if (b < 1) {
        throw ValidationError(std::string(what) + ": b must be at least 1");
    }
}

void require_threshold(double a, const char* what)
{
    if (!(a >= 0.0) || !std::isfinite(a)) {
        throw ValidationError(std::string(what) + ": threshold must be finite and nonnegative");
    }
}

void require_backoff(double a, const char* what)
{
    if (!(a >= 0.0 && a <= 1.0)) {
        throw ValidationError(std::string(what) + ": backoff must lie in [0, 1]");
    }
}

void require_snr(double snr, const char* what)
{
    if (!(snr > 0.0) || !std::isfinite(snr)) {
        throw ValidationError(std::string(what) + ": SNR must be positive");
    }
}

bool use_closed_form(int b, Path path)
{
    return path == Path::expansion || (path == Path::automatic && b <= closed_form_max_order);
}

double q1(double x, double y) { return specfun::marcum_q1(x, y, q1_acc); }

// E[h(chi)] for chi the maximum of b exponentials with mean mu.
template <typename H>
double expect_max(const H& h, int b, double mu)
{
    auto f = [&](double x) {
        const double q = std::exp(-x / mu);
        const double density = b / mu * q * std::exp((b - 1) * std::log1p(-q));
        return density == 0.0 ? 0.0 : h(x) * density;
    };
    return numerics::integrate_to_infinity(f, 0.0, mu * (std::log(static_cast<double>(b)) + 8.0), quad_opts)
        .value;
}

template <typename T>
double i2_sum(const IntegralArgs& g, int b)
{
    using std::exp;
    const T w2 = T(g.varpi) * T(g.varpi);
    const T t2 = T(g.vartheta) * T(g.vartheta);
    const T mu = T(g.mean);
    numerics::CompensatedSum<T> sum;
    T binom = T(1);
    for (int l = 0; l < b; ++l) {
        const T zeta = T(2 * (l + 1)) / mu;
        // e^(-t2/2) + e^(-zeta t2/(2(w2+zeta))) (1 - e^(-w2 t2/(2(w2+zeta)))) collapses
        // to the middle exponential
        const T term = binom / zeta * exp(-zeta * t2 / (T(2) * (w2 + zeta)));
        sum.add(l % 2 == 0 ? term : T(-term));
        binom = binom * T(b - 1 - l) / T(l + 1);
    }
    return static_cast<double>(T(2 * b) / mu * sum.value());
}

template <typename T>
double i4_sum(const IntegralArgs& g, int b)
{
    using std::sqrt;
    const T w2 = T(g.varpi) * T(g.varpi);
    const T t2 = T(g.vartheta) * T(g.vartheta);
    const T mu = T(g.mean);
    numerics::CompensatedSum<T> sum;
    T binom = T(1);
    for (int l = 0; l < b; ++l) {
        const T zeta = T(2 * (l + 1)) / mu;
        const T phi = w2 + t2 + zeta;
        const T psi = w2 - t2 + zeta;
        const T varsigma = sqrt(phi * phi - T(4) * w2 * t2);
        const T term = binom / zeta * (T(1) + psi / varsigma);
        sum.add(l % 2 == 0 ? term : T(-term));
        binom = binom * T(b - 1 - l) / T(l + 1);
    }
    return static_cast<double>(T(b) / mu * sum.value());
}

template <typename T>
double i3_bound_sum(const IntegralArgs& g, int b, double snr)
{
    using specfun::detail::hyp2f1_series;
    using std::log;
    const T tol = std::numeric_limits<T>::epsilon() * T(16);
    const T w2 = T(g.varpi) * T(g.varpi);
    const T t2 = T(g.vartheta) * T(g.vartheta);
    const T mu = T(g.mean);
    const T half = T(1) / T(2);
    const T three_halves = T(3) / T(2);
    numerics::CompensatedSum<T> sum;
    T binom = T(1);
    for (int l = 0; l < b; ++l) {
        const T zeta = T(2 * (l + 1)) / mu;
        const T phi = w2 + t2 + zeta;
        const T z = T(4) * w2 * t2 / (phi * phi);
        const T r = w2 / phi;
        const T inner = r * hyp2f1_series(T(1), three_halves, T(2), z, tol) -
                        hyp2f1_series(half, T(1), T(1), z, tol) +
                        T(2) * zeta / phi *
                            (r * hyp2f1_series(three_halves, T(2), T(2), z, tol) -
                             half * hyp2f1_series(T(1), three_halves, T(1), z, tol));
        const T term = binom / (zeta * zeta) * (T(1) + t2 / phi * inner);
        sum.add(l % 2 == 0 ? term : T(-term));
        binom = binom * T(b - 1 - l) / T(l + 1);
    }
    const T scale = T(4) * T(snr) * T(g.a) * T(b) / (mu * log(T(2)));
    return static_cast<double>(scale * sum.value());
}

double harmonic(int b)
{
    double h = 0.0;
    for (int i = b; i >= 1; --i) {
        h += 1.0 / i;
    }
    return h;
}

SystemConfig with_full_feedback(const SystemConfig& sys)
{
    SystemConfig full = sys;
    full.base_best_m = sys.full_feedback_m();
    return full;
}

bool is_full_feedback(const SystemConfig& sys) { return sys.base_best_m == sys.full_feedback_m(); }

enum class Route { closed, expansion, quadrature };

Route pick_route(const SystemConfig& sys, Path path)
{
    if (path == Path::quadrature) {
        return Route::quadrature;
    }
    if (path == Path::expansion) {
        return is_full_feedback(sys) ? Route::closed : Route::expansion;
    }
    if (is_full_feedback(sys)) {
        return Route::closed;
    }
    return analytic::expansion_well_conditioned(sys) ? Route::expansion : Route::quadrature;
}

// E[h(X); block scheduled] for X the scheduled estimated CQI.
template <typename H>
double integrate_scheduled(const analytic::ScheduledCqiLaw& law, const H& h)
{
    auto f = [&](double x) {
        const double d = law.density(x);
        return d == 0.0 ? 0.0 : h(x) * d;
    };
    return numerics::integrate_to_infinity(f, 0.0, law.bulk_extent(), quad_opts).value;
}

// sum_b w_b term(b) over the collapsed expansion.
template <typename Term>
double expansion_sum(const analytic::ExpansionWeights& w, const Term& term)
{
    numerics::CompensatedSum<double> sum;
    for (std::size_t b = 1; b < w.weight.size(); ++b) {
        if (w.weight[b] != 0.0) {
            sum.add(w.weight[b] * term(static_cast<int>(b)));
        }
    }
    return sum.value();
}

// Golden-section maximization of a unimodal f on [lo, hi].
template <typename F>
double golden_max(const F& f, double lo, double hi, double tol)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

void StrategyParams::validate() const
{
    if (!(beta0 >= 0.0) || !std::isfinite(beta0)) {
        throw ValidationError("beta0 must be finite and nonnegative");
    }
    if (!(beta1 >= 0.0 && beta1 <= 1.0)) {
        throw ValidationError("beta1 must lie in [0, 1]");
    }
}

IntegralArgs::IntegralArgs(double a_, const ImpairmentParams& imp) : a(a_)
{
    imp.validate();
    require_threshold(a_, "IntegralArgs");
    alpha_w = imp.alpha_w();
    varpi = alpha_w * imp.delay_corr;
    vartheta = alpha_w * std::sqrt(a_);
    mean = imp.estimate_mean();
    // phi > 2 varpi vartheta because zeta > 0; the largest argument is at l = 0
    if (!(hyper_arg(0) < 1.0)) {
        throw NumericalError("IntegralArgs: hypergeometric argument reached 1");
    }
}

double IntegralArgs::varsigma(int l) const
{
    const double p = phi(l);
    return std::sqrt(p * p - 4.0 * varpi * varpi * vartheta * vartheta);
}

double IntegralArgs::hyper_arg(int l) const
{
    const double p = phi(l);
    return 4.0 * varpi * varpi * vartheta * vartheta / (p * p);
}

double i2(double a, int b, const ImpairmentParams& imp, Path path)
{
    require_order(b, "i2");
    const IntegralArgs g(a, imp);
    if (a == 0.0) {
        return 1.0;
    }
    if (!use_closed_form(b, path)) {
        return expect_max([&](double x) { return q1(g.varpi * std::sqrt(x), g.vartheta); }, b, g.mean);
    }
    if (b <= closed_form_max_order) {
        return i2_sum<mp::cpp_bin_float_quad>(g, b);
    }
    return i2_sum<mp::cpp_bin_float_100>(g, b);
}

double i4(double a, int b, const ImpairmentParams& imp, Path path)
{
    require_order(b, "i4");
    const IntegralArgs g(a, imp);
    if (a == 0.0) {
        return 1.0;
    }
    if (!use_closed_form(b, path)) {
        return expect_max(
            [&](double x) { return q1(g.varpi * std::sqrt(x), g.alpha_w * std::sqrt(a * x)); }, b, g.mean);
    }
    if (b <= closed_form_max_order) {
        return i4_sum<mp::cpp_bin_float_quad>(g, b);
    }
    return i4_sum<mp::cpp_bin_float_100>(g, b);
}

double i3_quadrature(double a, int b, const ImpairmentParams& imp, double snr)
{
    require_order(b, "i3_quadrature");
    require_backoff(a, "i3_quadrature");
    require_snr(snr, "i3_quadrature");
    const IntegralArgs g(a, imp);
    if (a == 0.0) {
        return 0.0;
    }
    return expect_max(
        [&](double x) {
            return q1(g.varpi * std::sqrt(x), g.alpha_w * std::sqrt(a * x)) * std::log2(1.0 + snr * a * x);
        },
        b, g.mean);
}

double i3_upper_bound(double a, int b, const ImpairmentParams& imp, double snr, Path path)
{
    require_order(b, "i3_upper_bound");
    require_backoff(a, "i3_upper_bound");
    require_snr(snr, "i3_upper_bound");
    const IntegralArgs g(a, imp);
    if (a == 0.0) {
        return 0.0;
    }
    if (!use_closed_form(b, path)) {
        const double slope = snr * a / std::log(2.0);
        return expect_max(
            [&](double x) { return q1(g.varpi * std::sqrt(x), g.alpha_w * std::sqrt(a * x)) * slope * x; },
            b, g.mean);
    }
    if (b <= closed_form_max_order) {
        return i3_bound_sum<mp::cpp_bin_float_quad>(g, b, snr);
    }
    return i3_bound_sum<mp::cpp_bin_float_100>(g, b, snr);
}

double jensen_mean(int b, const ImpairmentParams& imp)
{
    require_order(b, "jensen_mean");
    imp.validate_ranges();
    return imp.estimate_mean() * harmonic(b);
}

double i3_jensen(double a, int b, const ImpairmentParams& imp, double snr)
{
    require_order(b, "i3_jensen");
    require_backoff(a, "i3_jensen");
    require_snr(snr, "i3_jensen");
    const IntegralArgs g(a, imp);
    if (a == 0.0) {
        return 0.0;
    }
    const double e = jensen_mean(b, imp);
    return q1(g.varpi * std::sqrt(e), g.alpha_w * std::sqrt(a * e)) * std::log2(1.0 + snr * a * e);
}

bool jensen_integrand_concave(double a, const ImpairmentParams& imp, double snr)
{
    require_backoff(a, "jensen_integrand_concave");
    require_snr(snr, "jensen_integrand_concave");
    const IntegralArgs g(a, imp);
    constexpr int points = 600;
    constexpr double lo = 1e-6;
    constexpr double span = 4e7; // up to 40 mu
    double px = 0.0, pf = 0.0;
    double prev_slope = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= points; ++i) {
        const double x = g.mean * lo * std::pow(span, static_cast<double>(i) / points);
        const double f = q1(g.varpi * std::sqrt(x), g.alpha_w * std::sqrt(a * x)) * std::log2(1.0 + snr * a * x);
        if (i > 0) {
            const double s = (f - pf) / (x - px);
            // slack for the rounding of f in the differences
            if (s < -1e-12 || s > prev_slope * (1.0 + 1e-9) + 1e-12) {
                return false;
            }
            prev_slope = s;
        }
        px = x;
        pf = f;
    }
    return true;
}

std::vector<BackoffInterval> jensen_concavity_region(const ImpairmentParams& imp, double snr, double step)
{
    if (!(step > 0.0 && step <= 1.0)) {
        throw ValidationError("jensen_concavity_region: step must lie in (0, 1]");
    }
    std::vector<BackoffInterval> runs;
    bool open = false;
    const auto n = static_cast<long>(std::floor(1.0 / step + 1e-9));
    for (long k = 1; k <= n; ++k) {
        const double a = std::min(1.0, static_cast<double>(k) * step);
        if (jensen_integrand_concave(a, imp, snr)) {
            if (open) {
                runs.back().hi = a;
            } else {
                runs.push_back({a, a});
                open = true;
            }
        } else {
            open = false;
        }
    }
    return runs;
}

Metrics fixed_rate_metrics(const SystemConfig& sys, const ImpairmentParams& imp, double beta0, Path path)
{
    sys.validate();
    require_threshold(beta0, "fixed_rate_metrics");
    const IntegralArgs g(beta0, imp);
    const double rate = std::log2(1.0 + sys.snr * beta0);
    if (beta0 == 0.0) {
        return {0.0, 0.0};
    }
    const int users = sys.total_users();
    Metrics out;
    switch (pick_route(sys, path)) {
    case Route::closed: {
        const double success = i2(beta0, users, imp, path);
        out.goodput = rate * success;
        out.outage = 1.0 - success;
        break;
    }
    case Route::expansion: {
        const analytic::ExpansionWeights w = analytic::expansion_weights(sys);
        const double success = expansion_sum(w, [&](int b) { return i2(beta0, b, imp, path); });
        const double mass = expansion_sum(w, [](int) { return 1.0; });
        out.goodput = rate * success;
        out.outage = mass - success;
        break;
    }
    case Route::quadrature: {
        const analytic::ScheduledCqiLaw law(sys, g.mean);
        const double success = integrate_scheduled(
            law, [&](double x) { return q1(g.varpi * std::sqrt(x), g.vartheta); });
        out.goodput = rate * success;
        out.outage = law.scheduled_probability() - success;
        break;
    }
    }
    return out;
}

Metrics variable_rate_metrics(const SystemConfig& sys, const ImpairmentParams& imp, double beta1,
                              RateMode mode, Path path)
{
    sys.validate();
    require_backoff(beta1, "variable_rate_metrics");
    const IntegralArgs g(beta1, imp);
    if (beta1 == 0.0) {
        return {0.0, 0.0};
    }
    const double snr = sys.snr;
    const int users = sys.total_users();
    auto rate_term = [&](int b) {
        return mode == RateMode::jensen ? i3_jensen(beta1, b, imp, snr) : i3_quadrature(beta1, b, imp, snr);
    };

    Route route = pick_route(sys, path);
    if (mode == RateMode::jensen && route == Route::quadrature) {
        if (path == Path::quadrature) {
            throw ValidationError("variable_rate_metrics: Jensen mode has no quadrature form");
        }
        throw NumericalError("variable_rate_metrics: Jensen mode needs a well-conditioned expansion");
    }

    Metrics out;
    switch (route) {
    case Route::closed:
        out.goodput = rate_term(users);
        out.outage = 1.0 - i4(beta1, users, imp, path);
        break;
    case Route::expansion: {
        const analytic::ExpansionWeights w = analytic::expansion_weights(sys);
        out.goodput = expansion_sum(w, rate_term);
        out.outage = expansion_sum(w, [&](int b) { return 1.0 - i4(beta1, b, imp, path); });
        break;
    }
    case Route::quadrature: {
        const analytic::ScheduledCqiLaw law(sys, g.mean);
        auto success = [&](double x) { return q1(g.varpi * std::sqrt(x), g.alpha_w * std::sqrt(beta1 * x)); };
        out.goodput = integrate_scheduled(
            law, [&](double x) { return success(x) * std::log2(1.0 + snr * beta1 * x); });
        out.outage = law.scheduled_probability() - integrate_scheduled(law, success);
        break;
    }
    }
    return out;
}

Beta1Optimum optimize_beta1(const SystemConfig& sys, const ImpairmentParams& imp, std::optional<double> gamma)
{
    sys.validate();
    imp.validate();
    const int users = sys.total_users();
    const double snr = sys.snr;
    auto objective = [&](double beta) { return i3_jensen(beta, users, imp, snr); };

    constexpr double tol = 1e-7;
    double best = golden_max(objective, 0.0, 1.0, tol);
    double best_value = objective(best);

    // one Newton step on central differences, kept only if it improves
    const double h = 1e-4;
    if (best - h >= 0.0 && best + h <= 1.0) {
        const double fp = objective(best + h);
        const double fm = objective(best - h);
        const double d1 = (fp - fm) / (2.0 * h);
        const double d2 = (fp - 2.0 * best_value + fm) / (h * h);
        if (d2 < 0.0) {
            const double step = std::clamp(best - d1 / d2, 0.0, 1.0);
            if (std::abs(step - best) < 10.0 * tol) {
                const double v = objective(step);
                if (v > best_value) {
                    best = step;
                    best_value = v;
                }
            }
        }
    }
    for (double edge : {0.0, 1.0}) {
        const double v = objective(edge);
        if (v > best_value) {
            best = edge;
            best_value = v;
        }
    }

    Beta1Optimum out;
    out.beta1 = best;
    out.goodput = best_value;
    out.matched_m = gamma ? analytic::minimum_best_m(sys, *gamma).exact : 0;
    return out;
}

Beta0Optimum optimize_beta0(const SystemConfig& sys, const ImpairmentParams& imp, std::optional<double> gamma)
{
    sys.validate();
    imp.validate();
    const SystemConfig full = with_full_feedback(sys);
    auto objective = [&](double beta) { return fixed_rate_metrics(full, imp, beta).goodput; };

    constexpr int grid_points = 200;
    double upper = imp.estimate_mean() * (std::log(static_cast<double>(sys.total_users())) + 6.0);
    int best = 0;
    double step = 0.0;
    for (int attempt = 0; attempt < 30; ++attempt) {
        step = upper / grid_points;
        double best_value = -1.0;
        for (int i = 0; i <= grid_points; ++i) {
            const double v = objective(i * step);
            if (v > best_value) {
                best_value = v;
                best = i;
            }
        }
        if (best < grid_points) {
            break;
        }
        upper *= 2.0;
    }
    if (best == grid_points) {
        throw NumericalError("optimize_beta0: maximizer keeps running off the search domain");
    }
    const double lo = std::max(0.0, (best - 1) * step);
    const double hi = (best + 1) * step;
    Beta0Optimum out;
    out.beta0 = golden_max(objective, lo, hi, 1e-7);
    out.goodput = objective(out.beta0);
    out.matched_m = gamma ? analytic::minimum_best_m(sys, *gamma).exact : 0;
    return out;
}

} // namespace hetfb::goodput
