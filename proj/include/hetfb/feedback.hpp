#pragma once

#include <complex>
#include <span>
#include <vector>

#include "hetfb/channel.hpp"
#include "hetfb/system.hpp"

namespace hetfb {

struct FeedbackEntry {
    int subband = 0;
    double cqi = 0.0;
};

struct FeedbackReport {
    int user = 0;
    int cluster = 0;
    std::vector<FeedbackEntry> entries; // descending CQI
};

/// Subband average rate: mean of log2(1 + snr |H|^2) over the subcarriers.
double cqi_subband_avg_rate(std::span<const std::complex<double>> gains, double snr_per_subcarrier);

/// The m largest values with their indices, descending; ties go to the lower index.
std::vector<FeedbackEntry> best_m_select(std::span<const double> cqis, int m);

/// Number of subbands a user of cluster g reports: (eta_G / eta_g) M.
int cluster_feedback_quota(const SystemConfig& sys, int g);

/// Best-M reports for a subband-granular realization, CQI = |H|^2.
std::vector<FeedbackReport> build_reports(const SystemConfig& sys, const ChannelRealization& chan);

namespace detail {

/// Allocation-free best-m selection into `out`; `order` is scratch.
void best_m_into(std::span<const double> cqis, int m, std::vector<int>& order,
                 std::vector<FeedbackEntry>& out);

void build_reports_into(const SystemConfig& sys, const ChannelRealization& chan,
                        std::vector<double>& cqi_scratch, std::vector<int>& order_scratch,
                        std::vector<FeedbackReport>& out);

} // namespace detail

} // namespace hetfb
