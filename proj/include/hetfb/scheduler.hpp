#pragma once

#include <vector>

#include "hetfb/channel.hpp"
#include "hetfb/feedback.hpp"
#include "hetfb/system.hpp"

namespace hetfb {

/// Per resource block: the selected user and the CQI it reported, or
/// user == no_user for a scheduling outage (nobody reported the block).
struct ScheduleDecision {
    static constexpr int no_user = -1;
    struct Block {
        int user = no_user;
        double cqi = 0.0;
    };
    std::vector<Block> blocks;

    bool scheduled(int rb) const { return blocks[static_cast<std::size_t>(rb)].user != no_user; }
    int num_scheduled() const;
};

struct TransmissionOutcome {
    struct Block {
        double rate = 0.0; // attempted, bits/s/Hz
        bool success = false;
        double goodput = 0.0;
    };
    std::vector<Block> blocks;

    /// Goodput averaged over all resource blocks (idle blocks count as zero).
    double mean_goodput() const;
    int num_failures() const;
};

/// Opportunistic selection: on each block, the covering user with the
/// largest reported CQI wins; ties go to the lowest user id.
ScheduleDecision schedule(const std::vector<FeedbackReport>& reports, const SystemConfig& sys);

/// Fixed rate log2(1 + snr beta0); success iff the actual CQI exceeds beta0.
TransmissionOutcome realize_fixed_rate(const ScheduleDecision& decision,
                                       const ChannelRealization& actual, double beta0, double snr);

/// Rate log2(1 + snr beta1 cqi_hat); success iff the actual CQI exceeds beta1 cqi_hat.
TransmissionOutcome realize_variable_rate(const ScheduleDecision& decision,
                                          const ChannelRealization& actual, double beta1,
                                          double snr);

namespace detail {

void schedule_into(const std::vector<FeedbackReport>& reports, const SystemConfig& sys,
                   ScheduleDecision& out);

} // namespace detail

} // namespace hetfb
