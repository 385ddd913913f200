#include "hetfb/scheduler.hpp"

#include <cmath>

#include "hetfb/errors.hpp"

namespace hetfb {

int ScheduleDecision::num_scheduled() const
{
    int n = 0;
    for (const Block& b : blocks) {
        n += b.user != no_user ? 1 : 0;
    }
    return n;
}

double TransmissionOutcome::mean_goodput() const
{
    if (blocks.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const Block& b : blocks) {
        sum += b.goodput;
    }
    return sum / static_cast<double>(blocks.size());
}

int TransmissionOutcome::num_failures() const
{
    int n = 0;
    for (const Block& b : blocks) {
        n += (b.rate > 0.0 && !b.success) ? 1 : 0;
    }
    return n;
}

namespace detail {

void schedule_into(const std::vector<FeedbackReport>& reports, const SystemConfig& sys,
                   ScheduleDecision& out)
{
    out.blocks.assign(static_cast<std::size_t>(sys.num_rbs), ScheduleDecision::Block{});
    for (const FeedbackReport& rep : reports) {
        if (rep.cluster < 0 || rep.cluster >= sys.num_clusters()) {
            throw ValidationError("schedule: report refers to an unknown cluster");
        }
        const int width = sys.clusters[static_cast<std::size_t>(rep.cluster)].subband_size;
        const int subbands = sys.num_rbs / width;
        for (const FeedbackEntry& e : rep.entries) {
            if (e.subband < 0 || e.subband >= subbands) {
                throw ValidationError("schedule: reported subband out of range");
            }
            for (int n = e.subband * width; n < (e.subband + 1) * width; ++n) {
                auto& blk = out.blocks[static_cast<std::size_t>(n)];
                if (blk.user == ScheduleDecision::no_user || e.cqi > blk.cqi ||
                    (e.cqi == blk.cqi && rep.user < blk.user)) {
                    blk.user = rep.user;
                    blk.cqi = e.cqi;
                }
            }
        }
    }
}

} // namespace detail

ScheduleDecision schedule(const std::vector<FeedbackReport>& reports, const SystemConfig& sys)
{
    sys.validate();
    ScheduleDecision out;
    detail::schedule_into(reports, sys, out);
    return out;
}

namespace {

template <typename RateFn, typename ThresholdFn>
TransmissionOutcome realize(const ScheduleDecision& decision, const ChannelRealization& actual,
                            RateFn rate_of, ThresholdFn threshold_of)
{
    if (static_cast<int>(decision.blocks.size()) != actual.num_rbs) {
        throw ValidationError("realize: decision and channel disagree on the number of blocks");
    }
    TransmissionOutcome out;
    out.blocks.resize(decision.blocks.size());
    for (std::size_t n = 0; n < decision.blocks.size(); ++n) {
        const auto& d = decision.blocks[n];
        if (d.user == ScheduleDecision::no_user) {
            continue;
        }
        const double chi = std::norm(actual.rb_gain(d.user, static_cast<int>(n)));
        auto& o = out.blocks[n];
        o.rate = rate_of(d.cqi);
        o.success = o.rate == 0.0 || chi > threshold_of(d.cqi);
        o.goodput = o.success ? o.rate : 0.0;
    }
    return out;
}

} // namespace

TransmissionOutcome realize_fixed_rate(const ScheduleDecision& decision,
                                       const ChannelRealization& actual, double beta0, double snr)
{
    if (!(beta0 >= 0.0)) {
        throw ValidationError("beta0 must be nonnegative");
    }
    const double rate = std::log2(1.0 + snr * beta0);
    return realize(
        decision, actual, [rate](double) { return rate; }, [beta0](double) { return beta0; });
}

TransmissionOutcome realize_variable_rate(const ScheduleDecision& decision,
                                          const ChannelRealization& actual, double beta1,
                                          double snr)
{
    if (!(beta1 >= 0.0 && beta1 <= 1.0)) {
        throw ValidationError("beta1 must lie in [0, 1]");
    }
    return realize(
        decision, actual, [=](double cqi) { return std::log2(1.0 + snr * beta1 * cqi); },
        [beta1](double cqi) { return beta1 * cqi; });
}

} // namespace hetfb
