#include "hetfb/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hetfb/errors.hpp"

namespace hetfb {

double cqi_subband_avg_rate(std::span<const std::complex<double>> gains, double snr_per_subcarrier)
{
    if (gains.empty()) {
        throw ValidationError("cqi_subband_avg_rate: empty subband");
    }
    double sum = 0.0;
    for (const auto& h : gains) {
        sum += std::log2(1.0 + snr_per_subcarrier * std::norm(h));
    }
    return sum / static_cast<double>(gains.size());
}

namespace detail {

void best_m_into(std::span<const double> cqis, int m, std::vector<int>& order,
                 std::vector<FeedbackEntry>& out)
{
    if (m < 1 || static_cast<std::size_t>(m) > cqis.size()) {
        throw ValidationError("best_m_select: m must lie in [1, number of values]");
    }
    order.resize(cqis.size());
    std::iota(order.begin(), order.end(), 0);
    auto better = [&](int a, int b) {
        const double va = cqis[static_cast<std::size_t>(a)];
        const double vb = cqis[static_cast<std::size_t>(b)];
        return va > vb || (va == vb && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + m, order.end(), better);
    out.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const int idx = order[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = {idx, cqis[static_cast<std::size_t>(idx)]};
    }
}

void build_reports_into(const SystemConfig& sys, const ChannelRealization& chan,
                        std::vector<double>& cqi_scratch, std::vector<int>& order_scratch,
                        std::vector<FeedbackReport>& out)
{
    if (chan.granularity != Granularity::subband || chan.num_users() != sys.total_users()) {
        throw ValidationError("build_reports: realization does not match the system");
    }
    out.resize(static_cast<std::size_t>(chan.num_users()));
    int k = 0;
    for (int g = 0; g < sys.num_clusters(); ++g) {
        const int quota = cluster_feedback_quota(sys, g);
        for (int i = 0; i < sys.clusters[static_cast<std::size_t>(g)].num_users; ++i, ++k) {
            const auto& row = chan.gains[static_cast<std::size_t>(k)];
            cqi_scratch.resize(row.size());
            for (std::size_t s = 0; s < row.size(); ++s) {
                cqi_scratch[s] = std::norm(row[s]);
            }
            FeedbackReport& rep = out[static_cast<std::size_t>(k)];
            rep.user = k;
            rep.cluster = g;
            best_m_into(cqi_scratch, quota, order_scratch, rep.entries);
        }
    }
}

} // namespace detail

std::vector<FeedbackEntry> best_m_select(std::span<const double> cqis, int m)
{
    std::vector<int> order;
    std::vector<FeedbackEntry> out;
    detail::best_m_into(cqis, m, order, out);
    return out;
}

int cluster_feedback_quota(const SystemConfig& sys, int g)
{
    const int eta = sys.clusters.at(static_cast<std::size_t>(g)).subband_size;
    return sys.largest_subband() / eta * sys.base_best_m;
}

std::vector<FeedbackReport> build_reports(const SystemConfig& sys, const ChannelRealization& chan)
{
    sys.validate();
    std::vector<double> cqi;
    std::vector<int> order;
    std::vector<FeedbackReport> out;
    detail::build_reports_into(sys, chan, cqi, order, out);
    return out;
}

} // namespace hetfb
