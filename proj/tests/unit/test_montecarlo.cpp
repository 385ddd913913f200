#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "hetfb/analytic.hpp"
#include "hetfb/errors.hpp"
#include "hetfb/montecarlo.hpp"

using namespace hetfb;
using namespace hetfb::montecarlo;

namespace {

SystemConfig make_sys(int n, std::vector<Cluster> clusters, int m, double snr = 10.0)
{
    SystemConfig s;
    s.num_rbs = n;
    s.clusters = std::move(clusters);
    s.base_best_m = m;
    s.snr = snr;
    return s;
}

ExperimentSpec make_spec(SystemConfig sys, long trials, std::uint64_t seed)
{
    ExperimentSpec spec;
    spec.sys = std::move(sys);
    spec.trials = trials;
    spec.seed = seed;
    return spec;
}

CorrelatedChannelConfig small_grid()
{
    CorrelatedChannelConfig cfg;
    cfg.num_subcarriers = 64;
    cfg.subcarriers_per_rb = 4;
    cfg.pdp = pdp_exponential(6, 2.0);
    return cfg;
}

} // namespace

TEST_CASE("estimates")
{
    const auto e = summarize({1.0, 2.0, 3.0, 4.0});
    CHECK(e.mean == 2.5);
    CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)).epsilon(1e-15));
    CHECK(e.trials == 4);
    CHECK_THROWS_AS(summarize({1.0}), ValidationError);
}

TEST_CASE("experiment validation")
{
    auto spec = make_spec(make_sys(16, {{1, 2}}, 1), 100, 1);
    spec.model = ChannelModel::correlated;
    CHECK_THROWS_AS(run_perfect(spec), ValidationError);
    spec.correlated = small_grid();
    CHECK_NOTHROW(run_perfect(spec));
    CHECK_THROWS_AS(cross_validate(spec), ValidationError);
    spec.impairments = ImpairmentParams{0.01, 0.98};
    CHECK_THROWS_AS(run_perfect(spec), ValidationError);
    CHECK_THROWS_AS(run_imperfect(spec), ValidationError);

    auto plain = make_spec(make_sys(16, {{1, 2}}, 1), 1, 1);
    CHECK_THROWS_AS(run_perfect(plain), ValidationError);
    plain.trials = 10;
    CHECK_THROWS_AS(run_imperfect(plain), ValidationError);
    plain.strategy.beta1 = 1.5;
    plain.impairments = ImpairmentParams{0.01, 0.98};
    CHECK_THROWS_AS(run_imperfect(plain), ValidationError);
}

TEST_CASE("single user with full feedback has no selection gain")
{
    const auto spec = make_spec(make_sys(16, {{1, 1}}, 16), 20000, 3);
    const auto e = run_perfect(spec);
    CHECK(std::abs(e.mean - analytic::i1(10.0, 1)) < 3.0 * e.se);
}

TEST_CASE("subband-fading sum rate matches the analytic engine")
{
    for (const auto& sys : {make_sys(64, {{1, 4}, {4, 4}}, 2), make_sys(32, {{1, 3}, {2, 2}, {8, 2}}, 1),
                            make_sys(64, {{1, 10}, {4, 10}}, 4)}) {
        const auto checks = cross_validate(make_spec(sys, 20000, 11));
        REQUIRE(checks.size() == 1);
        CAPTURE(checks[0].z);
        CHECK_FALSE(checks[0].flagged);
    }
}

TEST_CASE("results do not depend on the worker count")
{
    auto spec = make_spec(make_sys(32, {{1, 3}, {4, 3}}, 2), 3000, 99);
    spec.workers = 1;
    const auto a = run_perfect(spec);
    spec.workers = 3;
    const auto b = run_perfect(spec);
    CHECK(a.mean == b.mean);
    CHECK(a.se == b.se);

    spec.impairments = ImpairmentParams{0.02, 0.95};
    spec.workers = 1;
    const auto c = run_imperfect(spec);
    spec.workers = 4;
    const auto d = run_imperfect(spec);
    CHECK(c.fixed_rate.goodput.mean == d.fixed_rate.goodput.mean);
    CHECK(c.variable_rate.outage.mean == d.variable_rate.outage.mean);
    CHECK(c.variable_rate.conditional_outage.se == d.variable_rate.conditional_outage.se);

    auto corr = make_spec(make_sys(16, {{1, 3}, {2, 2}}, 2), 500, 5);
    corr.model = ChannelModel::correlated;
    corr.correlated = small_grid();
    corr.workers = 1;
    const auto e = run_perfect(corr);
    corr.workers = 2;
    CHECK(run_perfect(corr).mean == e.mean);
}

TEST_CASE("standard error scales with the square root of the trial count")
{
    const auto small = run_perfect(make_spec(make_sys(32, {{1, 4}, {2, 4}}, 2), 4000, 21));
    const auto large = run_perfect(make_spec(make_sys(32, {{1, 4}, {2, 4}}, 2), 16000, 22));
    CHECK(small.se / large.se == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("imperfect feedback limits")
{
    auto spec = make_spec(make_sys(16, {{1, 4}}, 16), 5000, 8);
    spec.impairments = ImpairmentParams{0.01, 0.98};
    spec.strategy.beta0 = 0.0;
    spec.strategy.beta1 = 0.0;
    const auto zero = run_imperfect(spec);
    CHECK(zero.fixed_rate.goodput.mean == 0.0);
    CHECK(zero.fixed_rate.outage.mean == 0.0);
    CHECK(zero.variable_rate.goodput.mean == 0.0);
    CHECK(zero.variable_rate.outage.mean == 0.0);
    CHECK(zero.scheduling_outage.mean == 0.0);

    // the estimate carries no information: outage is P(Exp(1) <= beta0)
    spec.impairments = ImpairmentParams{0.0, 0.0};
    spec.strategy.beta0 = 0.7;
    const auto blind = run_imperfect(spec);
    CHECK(std::abs(blind.fixed_rate.outage.mean - (1.0 - std::exp(-0.7))) < 3.0 * blind.fixed_rate.outage.se);

    // perfect feedback: any backoff below 1 never fails
    spec.impairments = ImpairmentParams{0.0, 1.0};
    spec.strategy.beta1 = 0.999;
    const auto perfect = run_imperfect(spec);
    CHECK(perfect.variable_rate.outage.mean == 0.0);
}

TEST_CASE("imperfect feedback matches the analytic engine")
{
    auto spec = make_spec(make_sys(32, {{1, 3}, {4, 3}}, 1), 20000, 17);
    spec.impairments = ImpairmentParams{0.01, 0.98};
    spec.strategy = {1.0, 0.6};
    for (const auto& c : cross_validate(spec)) {
        CAPTURE(c.quantity);
        CAPTURE(c.z);
        CHECK_FALSE(c.flagged);
    }
    auto full = make_spec(make_sys(16, {{1, 5}}, 16), 20000, 18);
    full.impairments = ImpairmentParams{0.05, 0.9};
    full.strategy = {1.5, 0.4};
    const auto sim = run_imperfect(full);
    // every block is scheduled, so joint and conditional outage coincide
    CHECK(sim.fixed_rate.outage.mean == sim.fixed_rate.conditional_outage.mean);
    for (const auto& c : cross_validate(full)) {
        CAPTURE(c.quantity);
        CAPTURE(c.z);
        CHECK_FALSE(c.flagged);
    }
}

TEST_CASE("correlated sweep reuses one population")
{
    const auto cfg = small_grid();
    const std::vector<int> ks{1, 3, 6};
    const auto pts = correlated_sum_rate_sweep(cfg, 16, 10.0, {1, 2}, {1, 2}, ks, 400, 31, 2);
    REQUIRE(pts.size() == 12);
    for (const auto& p : pts) {
        auto spec = make_spec(make_sys(16, {{p.subband_size, p.users}}, p.best_m), 400, 31);
        spec.model = ChannelModel::correlated;
        spec.correlated = cfg;
        CAPTURE(p.subband_size);
        CAPTURE(p.best_m);
        CAPTURE(p.users);
        CHECK(run_perfect(spec).mean == p.rate.mean);
    }
    CHECK_THROWS_AS(correlated_sum_rate_sweep(cfg, 16, 10.0, {1}, {20}, ks, 100, 1), ValidationError);
}

TEST_CASE("feedback design comparison")
{
    const auto four = make_sys(64, {{1, 1}, {2, 1}, {4, 1}, {8, 1}}, 2);
    CHECK(homogeneous_report_count(four) == 8);
    auto four_m4 = four;
    four_m4.base_best_m = 4;
    CHECK(homogeneous_report_count(four_m4) == 15);

    // one cluster: every design reduces to the same schedule
    const auto one = make_sys(16, {{2, 4}}, 2);
    const auto rows = compare_feedback_designs(one, {2}, 2000, 4);
    REQUIRE(rows.size() == 3);
    const double joint = run_perfect(make_spec(one, 2000, 4)).mean;
    CHECK(rows[0].rate.mean == joint);
    CHECK(rows[1].rate.mean == doctest::Approx(joint).epsilon(1e-12));
    CHECK(rows[2].rate.mean == joint);

    const auto mixed = make_sys(32, {{1, 4}, {2, 4}, {4, 4}}, 1);
    const auto cmp = compare_feedback_designs(mixed, {1, 4}, 4000, 6);
    CHECK(cmp[0].strategy == "joint");
    CHECK(cmp[1].reports == homogeneous_report_count(mixed));
    CHECK(cmp[3].strategy == "separate");
    CHECK(cmp[0].rate.mean == run_perfect(make_spec(mixed, 4000, 6)).mean);
    CHECK_THROWS_AS(compare_feedback_designs(mixed, {3}, 100, 1), ValidationError);
}

TEST_CASE("an outage too rare to observe is judged under the analytic probability")
{
    auto spec = make_spec(make_sys(64, {{1, 20}}, 64), 2000, 5);
    spec.impairments = ImpairmentParams{0.01, 0.98};
    spec.strategy = {1.0, 0.1};
    const auto checks = cross_validate(spec);
    const auto it = std::find_if(checks.begin(), checks.end(),
                                 [](const CrossCheck& c) { return c.quantity == "variable_outage"; });
    REQUIRE(it != checks.end());
    REQUIRE(it->empirical == 0.0);
    REQUIRE(it->analytic > 0.0);
    const double blocks = 2000.0 * 64.0;
    CHECK(it->standard_error == doctest::Approx(std::sqrt(it->analytic * (1.0 - it->analytic) / blocks)));
    CHECK(std::isfinite(it->z));
    CHECK_FALSE(it->flagged);
}
