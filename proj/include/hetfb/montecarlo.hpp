#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hetfb/channel.hpp"
#include "hetfb/goodput.hpp"
#include "hetfb/system.hpp"

namespace hetfb::montecarlo {

enum class ChannelModel { subband_fading, correlated };

struct ExperimentSpec {
    ChannelModel model = ChannelModel::subband_fading;
    SystemConfig sys;
    std::optional<CorrelatedChannelConfig> correlated;
    std::optional<ImpairmentParams> impairments;
    goodput::StrategyParams strategy;
    long trials = 100000;
    std::uint64_t seed = 1;
    int workers = 0; // 0: one per hardware thread; results do not depend on it

    void validate() const;
};

struct EstimateWithError {
    double mean = 0.0;
    double se = 0.0; // sample standard deviation / sqrt(trials)
    long trials = 0;
};

/// Mean and standard error of i.i.d. samples, summed in index order.
EstimateWithError summarize(const std::vector<double>& samples);

/// Average sum rate per resource block under perfect feedback. The block
/// rate is log2(1 + snr cqi) for |H|^2 CQIs and the reported subband
/// average rate itself in the correlated model; idle blocks count as zero.
EstimateWithError run_perfect(const ExperimentSpec& spec);

struct StrategyEstimate {
    EstimateWithError goodput;
    EstimateWithError outage;             // failed blocks / all blocks
    EstimateWithError conditional_outage; // failed blocks / scheduled blocks, trials with none skipped
};

struct ImperfectEstimate {
    StrategyEstimate fixed_rate;    // threshold strategy.beta0
    StrategyEstimate variable_rate; // backoff strategy.beta1
    EstimateWithError scheduling_outage;
};

/// Goodput and outage of both rate-adaptation strategies on the same
/// channel draws. Subband fading model only.
ImperfectEstimate run_imperfect(const ExperimentSpec& spec);

struct CrossCheck {
    std::string quantity;
    double empirical = 0.0;
    double standard_error = 0.0; // binomial under the analytic value when no outage was observed
    double analytic = 0.0;
    double z = 0.0;
    bool flagged = false; // |z| > 3
};

/// Simulation against the analytic engine: the sum rate without
/// impairments, R0/P0/R1/P1 with them.
std::vector<CrossCheck> cross_validate(const ExperimentSpec& spec);

/// Sum rates of single-cluster systems on the correlated channel for every
/// (subband size, M, K) combination. Each trial draws the largest user
/// population once; smaller K use its leading users.
struct CorrelatedSweepPoint {
    int subband_size = 1;
    int best_m = 1;
    int users = 1;
    EstimateWithError rate;
};

std::vector<CorrelatedSweepPoint> correlated_sum_rate_sweep(const CorrelatedChannelConfig& cfg, int num_rbs,
                                                            double snr, const std::vector<int>& subband_sizes,
                                                            const std::vector<int>& best_ms,
                                                            const std::vector<int>& user_counts, long trials,
                                                            std::uint64_t seed, int workers = 0);

/// Feedback designs compared on one subband-fading population.
///  joint:       the heterogeneous best-M design.
///  homogeneous: every user reports on subbands of one common size with
///               ceil(sum_g (eta_G/eta_g) M / G) reports; a subband's CQI is
///               its mean block rate and a scheduled block earns its own rate.
///  separate:    clusters are served one at a time, each with its own
///               heterogeneous quota; the rate is averaged over clusters.
struct StrategyRate {
    std::string strategy;   // "joint", "homogeneous", "separate"
    int subband_size = 0;   // homogeneous only
    int reports = 0;        // per-user reports (homogeneous) or base M
    EstimateWithError rate;
};

std::vector<StrategyRate> compare_feedback_designs(const SystemConfig& sys,
                                                   const std::vector<int>& homogeneous_sizes, long trials,
                                                   std::uint64_t seed, int workers = 0);

/// Reports per user in the homogeneous baseline.
int homogeneous_report_count(const SystemConfig& sys);

} // namespace hetfb::montecarlo
