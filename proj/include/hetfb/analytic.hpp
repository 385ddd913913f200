#pragma once

#include <functional>
#include <vector>

#include "hetfb/system.hpp"

namespace hetfb::analytic {

/// How a closed-form quantity is evaluated.
///  expansion:  the finite order-statistics expansion (alternating sums).
///  quadrature: one-dimensional quadrature of the scheduled-CQI law.
///  automatic:  expansion when it is well conditioned, quadrature otherwise.
enum class Path { automatic, expansion, quadrature };

/// Coefficients xi_g(m), m = 0..M'-1, of the reported-CQI CDF of cluster g:
/// F(x) = sum_m xi_g(m) F_Z(x)^(N/eta_g - m).
std::vector<double> xi_coefficients(const SystemConfig& sys, int g);

/// CDF of the CQI a cluster-g user reports for a fixed subband, given that
/// the subband is among its reported ones. Unit-mean exponential CQI.
double reported_cqi_cdf(double x, const SystemConfig& sys, int g);

/// Expansion of the CDF of the scheduled CQI given the feedback set
/// composition tau (number of reporting users per cluster).
struct CoefficientTable {
    std::vector<int> tau;
    std::vector<std::vector<double>> xi;     // per cluster
    std::vector<std::vector<double>> lambda; // per cluster, xi polynomial to the power tau_g
    std::vector<double> theta;               // product of the lambdas, length phi + 1
    int phi = 0;
    int top_power = 0; // sum_g (N/eta_g) tau_g

    /// sum_m theta(m) F^(top_power - m)
    double conditional_cdf(double f) const;
};

CoefficientTable selection_coefficients(const SystemConfig& sys, const std::vector<int>& tau);

struct FeedbackSetDistribution {
    std::vector<std::vector<int>> tau;
    std::vector<double> prob;
};

/// Probability of every feedback-set composition (including tau = 0).
FeedbackSetDistribution feedback_set_pmf(const SystemConfig& sys);

/// Visits compositions in lexicographic order without materializing them.
void for_each_feedback_set(const SystemConfig& sys,
                           const std::function<void(const std::vector<int>&, double)>& visit);

/// E[log2(1 + a X)] for X the maximum of b unit-mean exponentials.
double i1(double a, int b, Path path = Path::automatic);

/// Collapsed expansion: the scheduled CQI X satisfies
///   E[h(X); block scheduled] = sum_b weight[b] E[h(max of b i.i.d. CQIs)]
/// for any h. weight[0] is unused. `condition` bounds the amplification of
/// rounding errors in that alternating sum.
struct ExpansionWeights {
    std::vector<double> weight;
    double condition = 1.0;
};

/// Cheap closed-form bound on ExpansionWeights::condition.
double expansion_condition(const SystemConfig& sys);
bool expansion_well_conditioned(const SystemConfig& sys);
ExpansionWeights expansion_weights(const SystemConfig& sys);

/// Law of the CQI of the scheduled user on one resource block. The CQI is
/// exponential with mean `cqi_mean` before selection; blocks nobody reports
/// carry an atom at zero. Products over clusters of
/// (1 - p + p F_g(x))^(K_g) are evaluated with positive terms only, so the
/// law stays accurate where the expansion cancels catastrophically.
class ScheduledCqiLaw {
public:
    explicit ScheduledCqiLaw(const SystemConfig& sys, double cqi_mean = 1.0);

    double scheduled_probability() const { return scheduled_; }
    double cdf(double x) const;
    double survival(double x) const;
    /// Density of the continuous part (total mass scheduled_probability()).
    double density(double x) const;

    /// Reported-CQI law of one cluster.
    double reported_cdf(int g, double x) const;
    double reported_survival(int g, double x) const;
    double reported_density(int g, double x) const;

    /// Length over which the integrands have most of their mass.
    double bulk_extent() const { return bulk_; }
    double cqi_mean() const { return mean_; }

private:
    struct Group {
        int subbands;
        int quota;
        int users;
    };
    std::vector<Group> groups_;
    double p_;
    double mean_;
    double scheduled_;
    double bulk_;
};

/// Average sum rate per resource block, bits/s/Hz.
double average_sum_rate(const SystemConfig& sys, Path path = Path::automatic);

struct MinimumBestM {
    int exact = 0;
    int approx = 0;
    std::vector<double> rate_ratio; // C(M)/C(M_F) for M = 1..M_F
};

/// Smallest M reaching the fraction gamma of the full-feedback sum rate,
/// together with the multiuser-diversity approximation.
MinimumBestM minimum_best_m(const SystemConfig& sys, double gamma);
int approx_minimum_best_m(const SystemConfig& sys, double gamma);

} // namespace hetfb::analytic
