#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "hetfb/rng.hpp"
#include "hetfb/system.hpp"

namespace hetfb {

/// Tapped-delay-line channel observed on an OFDM grid.
struct CorrelatedChannelConfig {
    int num_subcarriers = 256;
    int subcarriers_per_rb = 8;
    std::vector<double> pdp; // tap powers, sum to one

    int num_taps() const { return static_cast<int>(pdp.size()); }
    /// Checks the grid against `num_rbs` resource blocks.
    void validate(int num_rbs) const;
};

enum class Granularity { subcarrier, subband };

/// One fading draw for every user. gains[k] holds user k's values per
/// granule: subcarriers for the correlated model, subbands for the
/// subband fading model. granule_rbs[k] is the number of resource blocks
/// one subband spans (subband granularity only).
struct ChannelRealization {
    Granularity granularity = Granularity::subband;
    int num_rbs = 0;
    std::vector<int> granule_rbs;
    std::vector<std::vector<std::complex<double>>> gains;

    int num_users() const { return static_cast<int>(gains.size()); }
    /// Resource-block view of a subband-granular realization.
    std::complex<double> rb_gain(int user, int rb) const;
};

struct ImpairedRealization {
    ChannelRealization estimated; // h_hat, seen by the scheduler
    ChannelRealization actual;    // h_tilde, seen by the transmission
};

/// Exponential power delay profile with L taps and decay constant delta.
std::vector<double> pdp_exponential(int num_taps, double delta);

/// Frequency-domain correlation between subcarriers n1 and n2.
std::complex<double> subcarrier_correlation(const std::vector<double>& pdp, int n1, int n2,
                                            int num_subcarriers);

ChannelRealization gen_correlated_channel(const CorrelatedChannelConfig& cfg, int num_rbs,
                                          int num_users, std::uint64_t seed);

ChannelRealization gen_subband_fading(const SystemConfig& sys, std::uint64_t seed);

/// Treats each entry of `draw` as a unit-variance channel draw h_hat / sqrt(1 - sigma_w^2)
/// and returns the estimate h_hat together with the delayed actual channel
/// h_tilde = alpha (h_hat + w) + sqrt(1 - alpha^2) eps.
ImpairedRealization apply_impairments(const ChannelRealization& draw, const ImpairmentParams& imp,
                                      std::uint64_t seed);

/// Density of the actual CQI |h_tilde|^2 given the estimated CQI |h_hat|^2.
double conditional_pdf_actual(double x, double chi_hat, const ImpairmentParams& imp);

namespace detail {

/// Reusable generator for the correlated model; keeps the twiddle table.
class CorrelatedGenerator {
public:
    explicit CorrelatedGenerator(const CorrelatedChannelConfig& cfg);
    void draw(Rng& rng, std::vector<std::complex<double>>& out) const;

private:
    int num_subcarriers_;
    std::vector<double> tap_amplitude_;
    std::vector<std::complex<double>> twiddle_; // exp(-j 2 pi m / Nc)
};

/// Fills `out` with a subband-fading draw for every user, reusing storage.
void fill_subband_fading(const SystemConfig& sys, std::uint64_t seed, ChannelRealization& out);

/// In-place variant of apply_impairments.
void fill_impairments(const ChannelRealization& draw, const ImpairmentParams& imp,
                      std::uint64_t seed, ImpairedRealization& out);

} // namespace detail

} // namespace hetfb
