#include "hetfb/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "hetfb/detail/specfun_kernels.hpp"
#include "hetfb/errors.hpp"
#include "hetfb/quadrature.hpp"

namespace hetfb::analytic {

namespace mp = boost::multiprecision;
using BigInt = mp::cpp_int;
using BigPoly = std::vector<BigInt>;

namespace {

// Feedback-set enumerations beyond this many compositions, or clusters with
// more users than this, are left to the quadrature path.
constexpr double max_compositions = 20000.0;
constexpr int max_users_per_cluster = 25;
constexpr double max_condition = 1e4;
// Closed-form alternating sums in 113-bit arithmetic stay accurate to about
// 1e-15 relative up to this order; beyond it quadrature takes over.
constexpr int closed_form_max_order = 60;

void require_valid(const SystemConfig& sys) { sys.validate(); }

BigInt binomial(int n, int k)
{
    if (k < 0 || k > n) {
        return 0;
    }
    BigInt c = 1;
    for (int i = 1; i <= k; ++i) {
        c *= n - k + i;
        c /= i;
    }
    return c;
}

// M' xi(m): integer numerators of the reported-CQI coefficients.
BigPoly scaled_xi(int subbands, int quota)
{
    BigPoly xi(static_cast<std::size_t>(quota));
    for (int m = 0; m < quota; ++m) {
        BigInt acc = 0;
        for (int i = m; i < quota; ++i) {
            BigInt term = BigInt(quota - i) * binomial(subbands, i) * binomial(i, m);
            if ((i - m) % 2 == 0) {
                acc += term;
            } else {
                acc -= term;
            }
        }
        xi[static_cast<std::size_t>(m)] = acc;
    }
    return xi;
}

// a(y)^power by the power-series recursion
//   q_k = 1/(k a_0) sum_{j=1}^{min(k,d)} (j power - k + j) a_j q_{k-j}.
// Leading zero coefficients are factored out first, since the recursion
// divides by a_0. All divisions are exact over the integers.
BigPoly integer_power(const BigPoly& a, int power)
{
    if (power == 0) {
        return {BigInt(1)};
    }
    std::size_t shift = 0;
    while (shift < a.size() && a[shift] == 0) {
        ++shift;
    }
    if (shift == a.size()) {
        throw ValidationError("integer_power: zero polynomial");
    }
    const std::size_t degree = a.size() - 1 - shift;
    const std::size_t out_degree = degree * static_cast<std::size_t>(power);
    BigPoly q(out_degree + 1);
    const BigInt& a0 = a[shift];
    q[0] = mp::pow(a0, static_cast<unsigned>(power));
    for (std::size_t k = 1; k <= out_degree; ++k) {
        BigInt acc = 0;
        for (std::size_t j = 1; j <= std::min(k, degree); ++j) {
            const long coef = static_cast<long>(j) * power - static_cast<long>(k) + static_cast<long>(j);
            if (coef != 0) {
                acc += coef * a[shift + j] * q[k - j];
            }
        }
        q[k] = acc / (BigInt(static_cast<long>(k)) * a0);
    }
    BigPoly out(shift * static_cast<std::size_t>(power) + q.size());
    std::copy(q.begin(), q.end(), out.begin() + static_cast<long>(shift * power));
    return out;
}

BigPoly convolve(const BigPoly& x, const BigPoly& y)
{
    BigPoly out(x.size() + y.size() - 1);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0) {
            continue;
        }
        for (std::size_t j = 0; j < y.size(); ++j) {
            out[i + j] += x[i] * y[j];
        }
    }
    return out;
}

double ratio_to_double(const BigInt& num, const BigInt& den)
{
    return static_cast<double>(mp::cpp_rational(num, den));
}

double binomial_double(int n, int k)
{
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
    }
    return c;
}

double composition_count(const SystemConfig& sys)
{
    double count = 1.0;
    for (const Cluster& c : sys.clusters) {
        count *= c.num_users + 1.0;
    }
    return count;
}

template <typename T>
double i1_closed_form(double a, int b)
{
    using std::log;
    const T tol = std::numeric_limits<T>::epsilon();
    numerics::CompensatedSum<T> sum;
    T binom = T(1);
    for (int l = 0; l < b; ++l) {
        const T x = T(l + 1) / T(a);
        T term = binom / T(l + 1) * specfun::detail::e1_scaled(x, tol);
        sum.add(l % 2 == 0 ? term : T(-term));
        binom = binom * T(b - 1 - l) / T(l + 1);
    }
    return static_cast<double>(T(b) * sum.value() / log(T(2)));
}

double i1_quadrature(double a, int b)
{
    const double inv_ln2 = 1.0 / std::log(2.0);
    // E[log2(1 + aX)] = integral of a/((1 + a x) ln 2) P(X > x) dx
    auto f = [a, b, inv_ln2](double x) {
        const double survival = -std::expm1(b * std::log1p(-std::exp(-x)));
        return inv_ln2 * a / (1.0 + a * x) * survival;
    };
    const double extent = std::log(static_cast<double>(b)) + 8.0;
    return numerics::integrate_to_infinity(f, 0.0, extent, {1e-13, 1e-12, 8000}).value;
}

} // namespace

std::vector<double> xi_coefficients(const SystemConfig& sys, int g)
{
    require_valid(sys);
    const int quota = sys.largest_subband() / sys.clusters.at(static_cast<std::size_t>(g)).subband_size *
                      sys.base_best_m;
    const BigPoly xi = scaled_xi(sys.num_subbands(g), quota);
    std::vector<double> out;
    out.reserve(xi.size());
    for (const BigInt& v : xi) {
        out.push_back(ratio_to_double(v, quota));
    }
    return out;
}

double reported_cqi_cdf(double x, const SystemConfig& sys, int g)
{
    require_valid(sys);
    if (std::isnan(x) || x < 0.0) {
        throw std::domain_error("reported_cqi_cdf: x must be nonnegative");
    }
    ScheduledCqiLaw law(sys);
    return law.reported_cdf(g, x);
}

double CoefficientTable::conditional_cdf(double f) const
{
    double sum = 0.0;
    for (std::size_t m = 0; m < theta.size(); ++m) {
        sum += theta[m] * std::pow(f, top_power - static_cast<int>(m));
    }
    return sum;
}

CoefficientTable selection_coefficients(const SystemConfig& sys, const std::vector<int>& tau)
{
    require_valid(sys);
    if (static_cast<int>(tau.size()) != sys.num_clusters()) {
        throw ValidationError("selection_coefficients: tau needs one entry per cluster");
    }
    bool any = false;
    for (int g = 0; g < sys.num_clusters(); ++g) {
        const int t = tau[static_cast<std::size_t>(g)];
        if (t < 0 || t > sys.clusters[static_cast<std::size_t>(g)].num_users) {
            throw ValidationError("selection_coefficients: tau_g outside [0, K_g]");
        }
        any = any || t > 0;
    }
    if (!any) {
        throw ValidationError("selection_coefficients: the feedback set is empty");
    }

    CoefficientTable table;
    table.tau = tau;
    BigPoly theta{BigInt(1)};
    BigInt denominator = 1;
    for (int g = 0; g < sys.num_clusters(); ++g) {
        const int t = tau[static_cast<std::size_t>(g)];
        const int subbands = sys.num_subbands(g);
        const int quota = sys.largest_subband() / sys.clusters[static_cast<std::size_t>(g)].subband_size *
                          sys.base_best_m;
        const BigPoly xi = scaled_xi(subbands, quota);
        const BigPoly lambda = integer_power(xi, t);
        const BigInt lambda_den = mp::pow(BigInt(quota), static_cast<unsigned>(t));

        std::vector<double> xi_d;
        for (const BigInt& v : xi) {
            xi_d.push_back(ratio_to_double(v, quota));
        }
        std::vector<double> lambda_d;
        for (const BigInt& v : lambda) {
            lambda_d.push_back(ratio_to_double(v, lambda_den));
        }
        table.xi.push_back(std::move(xi_d));
        table.lambda.push_back(std::move(lambda_d));

        theta = convolve(theta, lambda);
        denominator *= lambda_den;
        table.phi += t * (quota - 1);
        table.top_power += subbands * t;
    }
    table.theta.reserve(theta.size());
    for (const BigInt& v : theta) {
        table.theta.push_back(ratio_to_double(v, denominator));
    }
    return table;
}

void for_each_feedback_set(const SystemConfig& sys,
                           const std::function<void(const std::vector<int>&, double)>& visit)
{
    require_valid(sys);
    const double p = sys.report_probability();
    const int total = sys.total_users();
    const auto groups = static_cast<std::size_t>(sys.num_clusters());
    std::vector<int> tau(groups, 0);
    while (true) {
        double prob = 1.0;
        int reporting = 0;
        for (std::size_t g = 0; g < groups; ++g) {
            prob *= binomial_double(sys.clusters[g].num_users, tau[g]);
            reporting += tau[g];
        }
        prob *= std::pow(p, reporting) * std::pow(1.0 - p, total - reporting);
        visit(tau, prob);
        std::size_t g = groups;
        while (g > 0) {
            --g;
            if (tau[g] < sys.clusters[g].num_users) {
                ++tau[g];
                std::fill(tau.begin() + static_cast<long>(g) + 1, tau.end(), 0);
                break;
            }
            if (g == 0) {
                return;
            }
        }
    }
}

FeedbackSetDistribution feedback_set_pmf(const SystemConfig& sys)
{
    FeedbackSetDistribution dist;
    for_each_feedback_set(sys, [&](const std::vector<int>& tau, double prob) {
        dist.tau.push_back(tau);
        dist.prob.push_back(prob);
    });
    return dist;
}

double i1(double a, int b, Path path)
{
    if (!(a > 0.0) || !std::isfinite(a)) {
        throw ValidationError("i1: a must be positive");
    }
    if (b < 1) {
        throw ValidationError("i1: b must be at least 1");
    }
    const bool closed = path == Path::expansion ||
                        (path == Path::automatic && b <= closed_form_max_order);
    if (!closed) {
        return i1_quadrature(a, b);
    }
    if (b <= closed_form_max_order) {
        return i1_closed_form<mp::cpp_bin_float_quad>(a, b);
    }
    return i1_closed_form<mp::cpp_bin_float_100>(a, b);
}

double expansion_condition(const SystemConfig& sys)
{
    require_valid(sys);
    const double p = sys.report_probability();
    double log_cond = 0.0;
    for (int g = 0; g < sys.num_clusters(); ++g) {
        double abs_sum = 0.0;
        for (double v : xi_coefficients(sys, g)) {
            abs_sum += std::abs(v);
        }
        log_cond += sys.clusters[static_cast<std::size_t>(g)].num_users * std::log(1.0 - p + p * abs_sum);
    }
    return std::exp(log_cond);
}

bool expansion_well_conditioned(const SystemConfig& sys)
{
    require_valid(sys);
    for (const Cluster& c : sys.clusters) {
        if (c.num_users > max_users_per_cluster) {
            return false;
        }
    }
    return composition_count(sys) <= max_compositions && expansion_condition(sys) <= max_condition;
}

ExpansionWeights expansion_weights(const SystemConfig& sys)
{
    require_valid(sys);
    int max_order = 0;
    for (int g = 0; g < sys.num_clusters(); ++g) {
        max_order += sys.num_subbands(g) * sys.clusters[static_cast<std::size_t>(g)].num_users;
    }
    ExpansionWeights out;
    out.weight.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
    out.condition = 0.0;
    for_each_feedback_set(sys, [&](const std::vector<int>& tau, double prob) {
        if (std::all_of(tau.begin(), tau.end(), [](int t) { return t == 0; })) {
            return;
        }
        const CoefficientTable table = selection_coefficients(sys, tau);
        for (std::size_t m = 0; m < table.theta.size(); ++m) {
            const int b = table.top_power - static_cast<int>(m);
            out.weight[static_cast<std::size_t>(b)] += prob * table.theta[m];
            out.condition += prob * std::abs(table.theta[m]);
        }
    });
    return out;
}

ScheduledCqiLaw::ScheduledCqiLaw(const SystemConfig& sys, double cqi_mean)
    : p_(sys.report_probability()), mean_(cqi_mean)
{
    require_valid(sys);
    if (!(cqi_mean > 0.0)) {
        throw ValidationError("ScheduledCqiLaw: CQI mean must be positive");
    }
    int total_cqis = 0;
    for (int g = 0; g < sys.num_clusters(); ++g) {
        const Cluster& c = sys.clusters[static_cast<std::size_t>(g)];
        groups_.push_back({sys.num_subbands(g), sys.largest_subband() / c.subband_size * sys.base_best_m,
                           c.num_users});
        total_cqis += c.num_users * sys.num_subbands(g);
    }
    scheduled_ = -std::expm1(sys.total_users() * std::log1p(-p_));
    bulk_ = mean_ * (std::log(static_cast<double>(total_cqis)) + 8.0);
}

namespace {

// log C(n, i) + i log q + (n - i) log f for the binomial(n, q) pmf.
double log_binomial_term(int n, int i, double log_q, double log_f)
{
    return std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * log_q +
           (n - i) * log_f;
}

} // namespace

double ScheduledCqiLaw::reported_survival(int g, double x) const
{
    const Group& grp = groups_.at(static_cast<std::size_t>(g));
    if (x <= 0.0) {
        return 1.0;
    }
    // P(reported > x) = sum_{i >= 1} min(i, M')/M' P(i of the n CQIs exceed x)
    const double log_q = -x / mean_;
    const double log_f = std::log(-std::expm1(log_q));
    double s = 0.0;
    for (int i = 1; i <= grp.subbands; ++i) {
        s += std::min(i, grp.quota) * std::exp(log_binomial_term(grp.subbands, i, log_q, log_f));
    }
    return std::min(1.0, s / grp.quota);
}

double ScheduledCqiLaw::reported_cdf(int g, double x) const
{
    const Group& grp = groups_.at(static_cast<std::size_t>(g));
    if (x <= 0.0) {
        return 0.0;
    }
    const double log_q = -x / mean_;
    const double log_f = std::log(-std::expm1(log_q));
    double s = 0.0;
    for (int i = 0; i < grp.quota; ++i) {
        s += (grp.quota - i) * std::exp(log_binomial_term(grp.subbands, i, log_q, log_f));
    }
    return std::min(1.0, s / grp.quota);
}

double ScheduledCqiLaw::reported_density(int g, double x) const
{
    const Group& grp = groups_.at(static_cast<std::size_t>(g));
    if (x < 0.0) {
        return 0.0;
    }
    const int n = grp.subbands;
    const double log_q = -x / mean_;
    if (x == 0.0) {
        // only the j = n term survives (F = 0), present when every subband is reported
        return grp.quota == n ? 1.0 / mean_ : 0.0;
    }
    const double log_f = std::log(-std::expm1(log_q));
    // (n / (M' mu)) sum_{j=1}^{M'} C(n-1, j-1) F^(n-j) q^j
    double s = 0.0;
    for (int j = 1; j <= grp.quota; ++j) {
        s += std::exp(log_binomial_term(n - 1, j - 1, log_q, log_f) + log_q);
    }
    return n * s / (grp.quota * mean_);
}

double ScheduledCqiLaw::survival(double x) const
{
    if (x < 0.0) {
        return 1.0;
    }
    double log_cdf = 0.0;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (groups_[g].users == 0) {
            continue;
        }
        log_cdf += groups_[g].users * std::log1p(-p_ * reported_survival(static_cast<int>(g), x));
    }
    return -std::expm1(log_cdf);
}

double ScheduledCqiLaw::cdf(double x) const
{
    if (x < 0.0) {
        return 0.0;
    }
    return 1.0 - survival(x);
}

double ScheduledCqiLaw::density(double x) const
{
    if (x < 0.0) {
        return 0.0;
    }
    std::vector<double> base(groups_.size());
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        base[g] = 1.0 - p_ * reported_survival(static_cast<int>(g), x);
    }
    double total = 0.0;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (groups_[g].users == 0) {
            continue;
        }
        double term = groups_[g].users * p_ * reported_density(static_cast<int>(g), x) *
                      std::pow(base[g], groups_[g].users - 1);
        for (std::size_t h = 0; h < groups_.size(); ++h) {
            if (h != g) {
                term *= std::pow(base[h], groups_[h].users);
            }
        }
        total += term;
    }
    return total;
}

double average_sum_rate(const SystemConfig& sys, Path path)
{
    require_valid(sys);
    const int users = sys.total_users();
    if (path != Path::quadrature && sys.base_best_m == sys.full_feedback_m()) {
        return i1(sys.snr, users);
    }
    const bool use_expansion =
        path == Path::expansion || (path == Path::automatic && expansion_well_conditioned(sys));
    if (use_expansion) {
        const ExpansionWeights w = expansion_weights(sys);
        numerics::CompensatedSum<double> sum;
        for (std::size_t b = 1; b < w.weight.size(); ++b) {
            if (w.weight[b] != 0.0) {
                sum.add(w.weight[b] * i1(sys.snr, static_cast<int>(b)));
            }
        }
        return sum.value();
    }
    const ScheduledCqiLaw law(sys);
    const double rho = sys.snr;
    const double inv_ln2 = 1.0 / std::log(2.0);
    auto f = [&](double x) { return inv_ln2 * rho / (1.0 + rho * x) * law.survival(x); };
    return numerics::integrate_to_infinity(f, 0.0, law.bulk_extent(), {1e-13, 1e-12, 8000}).value;
}

int approx_minimum_best_m(const SystemConfig& sys, double gamma)
{
    require_valid(sys);
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw ValidationError("gamma must lie in (0, 1)");
    }
    const int full = sys.full_feedback_m();
    const double v = full * -std::expm1(std::log1p(-gamma) / sys.total_users());
    const int m = static_cast<int>(std::ceil(v - 1e-9));
    return std::clamp(m, 1, full);
}

MinimumBestM minimum_best_m(const SystemConfig& sys, double gamma)
{
    MinimumBestM out;
    out.approx = approx_minimum_best_m(sys, gamma);
    const int full = sys.full_feedback_m();
    const double full_rate = i1(sys.snr, sys.total_users());
    SystemConfig probe = sys;
    for (int m = 1; m <= full; ++m) {
        probe.base_best_m = m;
        const double ratio = average_sum_rate(probe) / full_rate;
        out.rate_ratio.push_back(ratio);
        if (out.exact == 0 && ratio >= gamma) {
            out.exact = m;
        }
    }
    return out;
}

} // namespace hetfb::analytic
