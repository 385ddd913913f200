#include "hetfb/system.hpp"

#include <cmath>
#include <sstream>

#include "hetfb/errors.hpp"

namespace hetfb {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

} // namespace

void SystemConfig::validate() const
{
    if (num_rbs < 1) {
        throw ValidationError("num_rbs must be at least 1");
    }
    if (clusters.empty()) {
        throw ValidationError("at least one cluster is required");
    }
    long users = 0;
    for (std::size_t g = 0; g < clusters.size(); ++g) {
        const Cluster& c = clusters[g];
        if (!is_power_of_two(c.subband_size) || c.subband_size > num_rbs) {
            std::ostringstream msg;
            msg << "cluster " << g << ": subband size " << c.subband_size
                << " must be a power of two no larger than num_rbs";
            throw ValidationError(msg.str());
        }
        if (g > 0 && c.subband_size <= clusters[g - 1].subband_size) {
            throw ValidationError("cluster subband sizes must be strictly increasing");
        }
        if (c.num_users < 0) {
            throw ValidationError("cluster user counts must be nonnegative");
        }
        users += c.num_users;
    }
    if (num_rbs % largest_subband() != 0) {
        throw ValidationError("the largest subband size must divide num_rbs");
    }
    if (users < 1) {
        throw ValidationError("at least one user is required");
    }
    if (base_best_m < 1 || base_best_m > full_feedback_m()) {
        std::ostringstream msg;
        msg << "best_m " << base_best_m << " outside [1, " << full_feedback_m() << "]";
        throw ValidationError(msg.str());
    }
    if (!(snr > 0.0) || !std::isfinite(snr)) {
        throw ValidationError("snr must be positive and finite");
    }
}

int SystemConfig::total_users() const
{
    int k = 0;
    for (const Cluster& c : clusters) {
        k += c.num_users;
    }
    return k;
}

double SystemConfig::report_probability() const
{
    return static_cast<double>(largest_subband()) * base_best_m / num_rbs;
}

int SystemConfig::first_user(int g) const
{
    int k = 0;
    for (int i = 0; i < g; ++i) {
        k += clusters.at(i).num_users;
    }
    return k;
}

int SystemConfig::cluster_of(int user) const
{
    int end = 0;
    for (int g = 0; g < num_clusters(); ++g) {
        end += clusters[g].num_users;
        if (user < end) {
            return g;
        }
    }
    throw ValidationError("user index out of range");
}

void ImpairmentParams::validate_ranges() const
{
    if (!(est_error_var >= 0.0 && est_error_var < 1.0)) {
        throw ValidationError("est_err_var must lie in [0, 1)");
    }
    if (!(delay_corr >= 0.0 && delay_corr <= 1.0)) {
        throw ValidationError("alpha must lie in [0, 1]");
    }
}

void ImpairmentParams::validate() const
{
    validate_ranges();
    if (!(residual_var() > 0.0)) {
        throw ValidationError("alpha = 1 with est_err_var = 0 is perfect feedback; "
                              "the imperfect-feedback model is undefined there");
    }
}

double ImpairmentParams::residual_var() const
{
    const double a2 = delay_corr * delay_corr;
    return a2 * est_error_var + 1.0 - a2;
}

double ImpairmentParams::alpha_w() const { return std::sqrt(2.0 / residual_var()); }

std::vector<int> split_users(int total, int parts)
{
    if (parts < 1 || total < 0) {
        throw ValidationError("split_users: invalid arguments");
    }
    std::vector<int> out(static_cast<std::size_t>(parts), total / parts);
    for (int i = 0; i < total % parts; ++i) {
        ++out[static_cast<std::size_t>(i)];
    }
    return out;
}

std::vector<int> split_users_two(int total, double first_fraction)
{
    if (!(first_fraction >= 0.0 && first_fraction <= 1.0) || total < 0) {
        throw ValidationError("split_users_two: invalid arguments");
    }
    const int first = static_cast<int>(std::floor(first_fraction * total + 1e-9));
    return {first, total - first};
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace hetfb
