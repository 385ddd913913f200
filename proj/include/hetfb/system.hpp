#pragma once

#include <cstddef>
#include <vector>

namespace hetfb {

/// Users sharing one coherence bandwidth, hence one subband size.
struct Cluster {
    int subband_size = 1; // resource blocks per subband (eta_g)
    int num_users = 0;
};

/// Static description of a downlink with heterogeneous feedback.
/// Clusters are ordered by strictly increasing subband size; users are
/// numbered cluster by cluster.
struct SystemConfig {
    int num_rbs = 64;
    std::vector<Cluster> clusters{{1, 10}, {4, 10}};
    int base_best_m = 1;
    double snr = 10.0; // linear

    void validate() const;

    int num_clusters() const { return static_cast<int>(clusters.size()); }
    int total_users() const;
    int largest_subband() const { return clusters.back().subband_size; }
    /// Best-M value at which every cluster reports all of its subbands.
    int full_feedback_m() const { return num_rbs / largest_subband(); }
    int num_subbands(int g) const { return num_rbs / clusters.at(g).subband_size; }
    /// Probability that a given user reports a given subband (same in every cluster).
    double report_probability() const;

    int first_user(int g) const;
    int cluster_of(int user) const;
};

/// Channel estimation error and feedback delay.
struct ImpairmentParams {
    double est_error_var = 0.0; // sigma_w^2, in [0, 1)
    double delay_corr = 1.0;    // alpha, in [0, 1]

    /// Range checks only; the perfect pair (alpha = 1, sigma_w^2 = 0) passes.
    /// Enough for simulation.
    void validate_ranges() const;
    /// Range checks plus rejection of the perfect pair, for which the
    /// conditional density of the actual CQI degenerates.
    void validate() const;
    /// Conditional variance of the actual gain given the estimate.
    double residual_var() const;
    /// sqrt(2 / residual_var()).
    double alpha_w() const;
    /// Mean of the estimated CQI |h_hat|^2.
    double estimate_mean() const { return 1.0 - est_error_var; }
};

/// Integer split of `total` users over `parts` clusters; the remainder goes
/// to the leading clusters.
std::vector<int> split_users(int total, int parts);

/// Two-cluster partition with K_1 = floor(fraction * total) in the first
/// of two clusters.
std::vector<int> split_users_two(int total, double first_fraction);

double db_to_linear(double db);

} // namespace hetfb
