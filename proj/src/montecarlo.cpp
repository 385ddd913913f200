#include "hetfb/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <span>
#include <thread>

#include "hetfb/analytic.hpp"
#include "hetfb/errors.hpp"
#include "hetfb/feedback.hpp"
#include "hetfb/scheduler.hpp"

namespace hetfb::montecarlo {

namespace {

constexpr double skipped = std::numeric_limits<double>::quiet_NaN();

int resolve_workers(int requested, long trials)
{
    long n = requested > 0 ? requested : static_cast<long>(std::thread::hardware_concurrency());
    n = std::clamp(n, 1L, std::max(1L, trials));
    return static_cast<int>(n);
}

// Runs trials [0, trials) on contiguous chunks, one chunk per worker. Every
// worker owns the state returned by make_state(); body(state, trial, row)
// fills `width` values for that trial. Rows land in trial order, so the
// reduction afterwards does not depend on the worker count.
template <typename MakeState, typename Body>
std::vector<double> parallel_trials(long trials, int width, int workers, const MakeState& make_state,
                                    const Body& body)
{
    std::vector<double> rows(static_cast<std::size_t>(trials) * static_cast<std::size_t>(width));
    const int n = resolve_workers(workers, trials);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    auto run = [&](int w) {
        try {
            auto state = make_state();
            const long lo = trials * w / n;
            const long hi = trials * (w + 1) / n;
            for (long t = lo; t < hi; ++t) {
                body(state, t, rows.data() + t * width);
            }
        } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
    };
    if (n == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n));
        for (int w = 0; w < n; ++w) {
            pool.emplace_back(run, w);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return rows;
}

// Column j of the trial rows, NaN entries dropped.
EstimateWithError column_estimate(const std::vector<double>& rows, int width, int j)
{
    std::vector<double> col;
    col.reserve(rows.size() / static_cast<std::size_t>(width));
    for (std::size_t i = static_cast<std::size_t>(j); i < rows.size(); i += static_cast<std::size_t>(width)) {
        if (!std::isnan(rows[i])) {
            col.push_back(rows[i]);
        }
    }
    return summarize(col);
}

double block_rate_sum(const ScheduleDecision& d, double snr)
{
    double sum = 0.0;
    for (const auto& b : d.blocks) {
        if (b.user != ScheduleDecision::no_user) {
            sum += std::log2(1.0 + snr * b.cqi);
        }
    }
    return sum;
}

double reported_rate_sum(const ScheduleDecision& d)
{
    double sum = 0.0;
    for (const auto& b : d.blocks) {
        if (b.user != ScheduleDecision::no_user) {
            sum += b.cqi;
        }
    }
    return sum;
}

// Subband average rates of every subband of one user on the correlated grid.
void subband_rates(std::span<const std::complex<double>> subcarriers, int subcarriers_per_subband, double snr,
                   std::vector<double>& out)
{
    const std::size_t count = subcarriers.size() / static_cast<std::size_t>(subcarriers_per_subband);
    out.resize(count);
    for (std::size_t s = 0; s < count; ++s) {
        out[s] = cqi_subband_avg_rate(
            subcarriers.subspan(s * static_cast<std::size_t>(subcarriers_per_subband),
                                static_cast<std::size_t>(subcarriers_per_subband)),
            snr);
    }
}

struct SubbandState {
    ChannelRealization chan;
    std::vector<double> cqi;
    std::vector<int> order;
    std::vector<FeedbackReport> reports;
    ScheduleDecision decision;
};

struct CorrelatedState {
    detail::CorrelatedGenerator gen;
    std::vector<std::vector<std::complex<double>>> gains;
    std::vector<double> cqi;
    std::vector<int> order;
    std::vector<FeedbackReport> reports;
    ScheduleDecision decision;
};

void draw_correlated_users(CorrelatedState& st, std::uint64_t trial_seed, int users)
{
    st.gains.resize(static_cast<std::size_t>(users));
    for (int k = 0; k < users; ++k) {
        Rng rng(derive_seed(trial_seed, static_cast<std::uint64_t>(k)));
        st.gen.draw(rng, st.gains[static_cast<std::size_t>(k)]);
    }
}

EstimateWithError run_perfect_subband(const ExperimentSpec& spec)
{
    const SystemConfig& sys = spec.sys;
    const double n = sys.num_rbs;
    const auto rows = parallel_trials(
        spec.trials, 1, spec.workers, [] { return SubbandState{}; },
        [&](SubbandState& st, long t, double* row) {
            detail::fill_subband_fading(sys, derive_seed(spec.seed, static_cast<std::uint64_t>(t), 0), st.chan);
            detail::build_reports_into(sys, st.chan, st.cqi, st.order, st.reports);
            detail::schedule_into(st.reports, sys, st.decision);
            row[0] = block_rate_sum(st.decision, sys.snr) / n;
        });
    return column_estimate(rows, 1, 0);
}

EstimateWithError run_perfect_correlated(const ExperimentSpec& spec)
{
    const SystemConfig& sys = spec.sys;
    const CorrelatedChannelConfig& cfg = *spec.correlated;
    const int users = sys.total_users();
    const double n = sys.num_rbs;
    const auto rows = parallel_trials(
        spec.trials, 1, spec.workers, [&] { return CorrelatedState{detail::CorrelatedGenerator(cfg), {}, {}, {}, {}, {}}; },
        [&](CorrelatedState& st, long t, double* row) {
            draw_correlated_users(st, derive_seed(spec.seed, static_cast<std::uint64_t>(t), 0), users);
            st.reports.resize(static_cast<std::size_t>(users));
            for (int k = 0; k < users; ++k) {
                const int g = sys.cluster_of(k);
                const int width = sys.clusters[static_cast<std::size_t>(g)].subband_size * cfg.subcarriers_per_rb;
                subband_rates(st.gains[static_cast<std::size_t>(k)], width, sys.snr, st.cqi);
                FeedbackReport& rep = st.reports[static_cast<std::size_t>(k)];
                rep.user = k;
                rep.cluster = g;
                detail::best_m_into(st.cqi, cluster_feedback_quota(sys, g), st.order, rep.entries);
            }
            detail::schedule_into(st.reports, sys, st.decision);
            row[0] = reported_rate_sum(st.decision) / n;
        });
    return column_estimate(rows, 1, 0);
}

double z_score(double empirical, double se, double analytic)
{
    if (se > 0.0) {
        return (empirical - analytic) / se;
    }
    return empirical == analytic ? 0.0 : std::numeric_limits<double>::infinity();
}

CrossCheck make_check(std::string name, const EstimateWithError& e, double analytic)
{
    CrossCheck c;
    c.quantity = std::move(name);
    c.empirical = e.mean;
    c.standard_error = e.se;
    c.analytic = analytic;
    c.z = z_score(e.mean, e.se, analytic);
    c.flagged = !(std::abs(c.z) <= 3.0);
    return c;
}

// A run without a single failed block has zero sample variance. The
// standard error is then taken under the analytic failure probability,
// treating the trials x num_rbs blocks as independent draws.
CrossCheck make_outage_check(std::string name, EstimateWithError e, double analytic, int num_rbs)
{
    if (e.se == 0.0) {
        const double p = std::clamp(analytic, 0.0, 1.0);
        e.se = std::sqrt(p * (1.0 - p) / (static_cast<double>(e.trials) * num_rbs));
    }
    return make_check(std::move(name), e, analytic);
}

} // namespace

void ExperimentSpec::validate() const
{
    sys.validate();
    if (trials < 2) {
        throw ValidationError("trials must be at least 2");
    }
    if (workers < 0) {
        throw ValidationError("workers must be nonnegative");
    }
    strategy.validate();
    if (model == ChannelModel::correlated) {
        if (!correlated) {
            throw ValidationError("the correlated channel model needs its channel configuration");
        }
        correlated->validate(sys.num_rbs);
        for (const Cluster& c : sys.clusters) {
            if (c.subband_size * correlated->subcarriers_per_rb > correlated->num_subcarriers) {
                throw ValidationError("subband wider than the subcarrier grid");
            }
        }
    }
    if (impairments) {
        impairments->validate_ranges();
    }
}

EstimateWithError summarize(const std::vector<double>& samples)
{
    if (samples.size() < 2) {
        throw ValidationError("an estimate needs at least two samples");
    }
    const double n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double x : samples) {
        sum += x;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : samples) {
        ss += (x - mean) * (x - mean);
    }
    EstimateWithError e;
    e.mean = mean;
    e.se = std::sqrt(ss / (n - 1.0) / n);
    e.trials = static_cast<long>(samples.size());
    return e;
}

EstimateWithError run_perfect(const ExperimentSpec& spec)
{
    spec.validate();
    if (spec.impairments) {
        throw ValidationError("run_perfect: the experiment carries impairments");
    }
    return spec.model == ChannelModel::correlated ? run_perfect_correlated(spec) : run_perfect_subband(spec);
}

ImperfectEstimate run_imperfect(const ExperimentSpec& spec)
{
    spec.validate();
    if (!spec.impairments) {
        throw ValidationError("run_imperfect: the experiment has no impairment parameters");
    }
    if (spec.model != ChannelModel::subband_fading) {
        throw ValidationError("run_imperfect: only the subband fading model is supported");
    }
    struct State {
        SubbandState base;
        ImpairedRealization impaired;
    };
    const SystemConfig& sys = spec.sys;
    const ImpairmentParams imp = *spec.impairments;
    const double n = sys.num_rbs;
    constexpr int width = 7;
    const auto rows = parallel_trials(
        spec.trials, width, spec.workers, [] { return State{}; },
        [&](State& st, long t, double* row) {
            const auto trial = static_cast<std::uint64_t>(t);
            detail::fill_subband_fading(sys, derive_seed(spec.seed, trial, 0), st.base.chan);
            detail::fill_impairments(st.base.chan, imp, derive_seed(spec.seed, trial, 1), st.impaired);
            detail::build_reports_into(sys, st.impaired.estimated, st.base.cqi, st.base.order, st.base.reports);
            detail::schedule_into(st.base.reports, sys, st.base.decision);
            const int scheduled = st.base.decision.num_scheduled();
            const auto fixed = realize_fixed_rate(st.base.decision, st.impaired.actual, spec.strategy.beta0, sys.snr);
            const auto variable =
                realize_variable_rate(st.base.decision, st.impaired.actual, spec.strategy.beta1, sys.snr);
            row[0] = fixed.mean_goodput();
            row[1] = fixed.num_failures() / n;
            row[2] = scheduled > 0 ? static_cast<double>(fixed.num_failures()) / scheduled : skipped;
            row[3] = variable.mean_goodput();
            row[4] = variable.num_failures() / n;
            row[5] = scheduled > 0 ? static_cast<double>(variable.num_failures()) / scheduled : skipped;
            row[6] = (n - scheduled) / n;
        });
    ImperfectEstimate out;
    out.fixed_rate = {column_estimate(rows, width, 0), column_estimate(rows, width, 1),
                      column_estimate(rows, width, 2)};
    out.variable_rate = {column_estimate(rows, width, 3), column_estimate(rows, width, 4),
                         column_estimate(rows, width, 5)};
    out.scheduling_outage = column_estimate(rows, width, 6);
    return out;
}

std::vector<CrossCheck> cross_validate(const ExperimentSpec& spec)
{
    spec.validate();
    if (spec.model != ChannelModel::subband_fading) {
        throw ValidationError("cross_validate: the analytic engine covers the subband fading model only");
    }
    std::vector<CrossCheck> out;
    if (!spec.impairments) {
        out.push_back(make_check("sum_rate", run_perfect(spec), analytic::average_sum_rate(spec.sys)));
        return out;
    }
    spec.impairments->validate();
    const ImperfectEstimate sim = run_imperfect(spec);
    const auto fixed = goodput::fixed_rate_metrics(spec.sys, *spec.impairments, spec.strategy.beta0);
    const auto variable = goodput::variable_rate_metrics(spec.sys, *spec.impairments, spec.strategy.beta1);
    out.push_back(make_check("fixed_goodput", sim.fixed_rate.goodput, fixed.goodput));
    out.push_back(make_outage_check("fixed_outage", sim.fixed_rate.outage, fixed.outage, spec.sys.num_rbs));
    out.push_back(make_check("variable_goodput", sim.variable_rate.goodput, variable.goodput));
    out.push_back(make_outage_check("variable_outage", sim.variable_rate.outage, variable.outage, spec.sys.num_rbs));
    return out;
}

std::vector<CorrelatedSweepPoint> correlated_sum_rate_sweep(const CorrelatedChannelConfig& cfg, int num_rbs,
                                                            double snr, const std::vector<int>& subband_sizes,
                                                            const std::vector<int>& best_ms,
                                                            const std::vector<int>& user_counts, long trials,
                                                            std::uint64_t seed, int workers)
{
    cfg.validate(num_rbs);
    if (subband_sizes.empty() || best_ms.empty() || user_counts.empty()) {
        throw ValidationError("correlated_sum_rate_sweep: empty parameter grid");
    }
    if (trials < 2) {
        throw ValidationError("trials must be at least 2");
    }
    std::vector<CorrelatedSweepPoint> points;
    std::vector<SystemConfig> systems;
    for (int eta : subband_sizes) {
        for (int m : best_ms) {
            for (int k : user_counts) {
                SystemConfig s;
                s.num_rbs = num_rbs;
                s.clusters = {{eta, k}};
                s.base_best_m = m;
                s.snr = snr;
                s.validate();
                systems.push_back(s);
                points.push_back({eta, m, k, {}});
            }
        }
    }
    const int max_users = *std::max_element(user_counts.begin(), user_counts.end());
    const int width = static_cast<int>(points.size());
    const double n = num_rbs;

    struct State {
        CorrelatedState corr;
        std::vector<std::vector<double>> rates; // per user, per subband
        std::vector<FeedbackReport> prefix;
    };
    const auto rows = parallel_trials(
        trials, width, workers,
        [&] { return State{{detail::CorrelatedGenerator(cfg), {}, {}, {}, {}, {}}, {}, {}}; },
        [&](State& st, long t, double* row) {
            draw_correlated_users(st.corr, derive_seed(seed, static_cast<std::uint64_t>(t), 0), max_users);
            st.rates.resize(static_cast<std::size_t>(max_users));
            std::size_t idx = 0;
            for (int eta : subband_sizes) {
                for (int k = 0; k < max_users; ++k) {
                    subband_rates(st.corr.gains[static_cast<std::size_t>(k)], eta * cfg.subcarriers_per_rb, snr,
                                  st.rates[static_cast<std::size_t>(k)]);
                }
                for (int m : best_ms) {
                    st.corr.reports.resize(static_cast<std::size_t>(max_users));
                    for (int k = 0; k < max_users; ++k) {
                        FeedbackReport& rep = st.corr.reports[static_cast<std::size_t>(k)];
                        rep.user = k;
                        rep.cluster = 0;
                        detail::best_m_into(st.rates[static_cast<std::size_t>(k)], m, st.corr.order, rep.entries);
                    }
                    for (int k : user_counts) {
                        st.prefix.assign(st.corr.reports.begin(), st.corr.reports.begin() + k);
                        detail::schedule_into(st.prefix, systems[idx], st.corr.decision);
                        row[idx] = reported_rate_sum(st.corr.decision) / n;
                        ++idx;
                    }
                }
            }
        });
    for (int j = 0; j < width; ++j) {
        points[static_cast<std::size_t>(j)].rate = column_estimate(rows, width, j);
    }
    return points;
}

int homogeneous_report_count(const SystemConfig& sys)
{
    sys.validate();
    int total = 0;
    for (int g = 0; g < sys.num_clusters(); ++g) {
        total += cluster_feedback_quota(sys, g);
    }
    const int groups = sys.num_clusters();
    return (total + groups - 1) / groups;
}

std::vector<StrategyRate> compare_feedback_designs(const SystemConfig& sys,
                                                   const std::vector<int>& homogeneous_sizes, long trials,
                                                   std::uint64_t seed, int workers)
{
    sys.validate();
    if (trials < 2) {
        throw ValidationError("trials must be at least 2");
    }
    const int users = sys.total_users();
    const int reports = homogeneous_report_count(sys);
    std::vector<SystemConfig> homogeneous;
    for (int eta : homogeneous_sizes) {
        if (eta < 1 || sys.num_rbs % eta != 0) {
            throw ValidationError("homogeneous subband size must divide the number of resource blocks");
        }
        SystemConfig h;
        h.num_rbs = sys.num_rbs;
        h.clusters = {{eta, users}};
        h.base_best_m = std::min(reports, sys.num_rbs / eta);
        h.snr = sys.snr;
        h.validate();
        homogeneous.push_back(h);
    }
    // one single-cluster system per populated cluster, keeping its quota
    std::vector<SystemConfig> separate;
    std::vector<int> separate_first;
    for (int g = 0; g < sys.num_clusters(); ++g) {
        const Cluster& c = sys.clusters[static_cast<std::size_t>(g)];
        if (c.num_users == 0) {
            continue;
        }
        SystemConfig s;
        s.num_rbs = sys.num_rbs;
        s.clusters = {c};
        s.base_best_m = cluster_feedback_quota(sys, g);
        s.snr = sys.snr;
        s.validate();
        separate.push_back(s);
        separate_first.push_back(sys.first_user(g));
    }

    const int width = 2 + static_cast<int>(homogeneous.size());
    const double n = sys.num_rbs;
    struct State {
        SubbandState base;
        std::vector<std::vector<double>> block_rates; // per user, per block
        std::vector<FeedbackReport> subset;
    };
    const auto rows = parallel_trials(
        trials, width, workers, [] { return State{}; },
        [&](State& st, long t, double* row) {
            detail::fill_subband_fading(sys, derive_seed(seed, static_cast<std::uint64_t>(t), 0), st.base.chan);

            detail::build_reports_into(sys, st.base.chan, st.base.cqi, st.base.order, st.base.reports);
            detail::schedule_into(st.base.reports, sys, st.base.decision);
            row[0] = block_rate_sum(st.base.decision, sys.snr) / n;

            st.block_rates.resize(static_cast<std::size_t>(users));
            for (int k = 0; k < users; ++k) {
                auto& r = st.block_rates[static_cast<std::size_t>(k)];
                r.resize(static_cast<std::size_t>(sys.num_rbs));
                for (int b = 0; b < sys.num_rbs; ++b) {
                    r[static_cast<std::size_t>(b)] = std::log2(1.0 + sys.snr * std::norm(st.base.chan.rb_gain(k, b)));
                }
            }
            for (std::size_t h = 0; h < homogeneous.size(); ++h) {
                const SystemConfig& hs = homogeneous[h];
                const int eta = hs.clusters[0].subband_size;
                st.subset.resize(static_cast<std::size_t>(users));
                for (int k = 0; k < users; ++k) {
                    const auto& r = st.block_rates[static_cast<std::size_t>(k)];
                    st.base.cqi.assign(static_cast<std::size_t>(sys.num_rbs / eta), 0.0);
                    for (int b = 0; b < sys.num_rbs; ++b) {
                        st.base.cqi[static_cast<std::size_t>(b / eta)] += r[static_cast<std::size_t>(b)] / eta;
                    }
                    FeedbackReport& rep = st.subset[static_cast<std::size_t>(k)];
                    rep.user = k;
                    rep.cluster = 0;
                    detail::best_m_into(st.base.cqi, hs.base_best_m, st.base.order, rep.entries);
                }
                detail::schedule_into(st.subset, hs, st.base.decision);
                double sum = 0.0;
                for (int b = 0; b < sys.num_rbs; ++b) {
                    const int u = st.base.decision.blocks[static_cast<std::size_t>(b)].user;
                    if (u != ScheduleDecision::no_user) {
                        sum += st.block_rates[static_cast<std::size_t>(u)][static_cast<std::size_t>(b)];
                    }
                }
                row[1 + h] = sum / n;
            }

            double sep = 0.0;
            for (std::size_t s = 0; s < separate.size(); ++s) {
                const int first = separate_first[s];
                const int count = separate[s].clusters[0].num_users;
                st.subset.assign(st.base.reports.begin() + first, st.base.reports.begin() + first + count);
                for (auto& rep : st.subset) {
                    rep.cluster = 0;
                }
                detail::schedule_into(st.subset, separate[s], st.base.decision);
                sep += block_rate_sum(st.base.decision, sys.snr) / n;
            }
            row[width - 1] = sep / static_cast<double>(separate.size());
        });

    std::vector<StrategyRate> out;
    out.push_back({"joint", 0, sys.base_best_m, column_estimate(rows, width, 0)});
    for (std::size_t h = 0; h < homogeneous.size(); ++h) {
        out.push_back({"homogeneous", homogeneous[h].clusters[0].subband_size, homogeneous[h].base_best_m,
                       column_estimate(rows, width, 1 + static_cast<int>(h))});
    }
    out.push_back({"separate", 0, sys.base_best_m, column_estimate(rows, width, width - 1)});
    return out;
}

} // namespace hetfb::montecarlo
