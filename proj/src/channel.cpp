#include "hetfb/channel.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "hetfb/errors.hpp"
#include "hetfb/specfun.hpp"

namespace hetfb {

void CorrelatedChannelConfig::validate(int num_rbs) const
{
    if (num_subcarriers < 1 || (num_subcarriers & (num_subcarriers - 1)) != 0) {
        throw ValidationError("num_subcarriers must be a power of two");
    }
    if (subcarriers_per_rb < 1 || num_subcarriers != num_rbs * subcarriers_per_rb) {
        std::ostringstream msg;
        msg << "num_subcarriers (" << num_subcarriers << ") must equal num_rbs (" << num_rbs
            << ") times subcarriers per resource block (" << subcarriers_per_rb << ")";
        throw ValidationError(msg.str());
    }
    if (pdp.empty() || num_taps() > num_subcarriers) {
        throw ValidationError("power delay profile needs between 1 and num_subcarriers taps");
    }
    double total = 0.0;
    for (double p : pdp) {
        if (!(p >= 0.0)) {
            throw ValidationError("tap powers must be nonnegative");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError("tap powers must sum to one");
    }
}

std::complex<double> ChannelRealization::rb_gain(int user, int rb) const
{
    if (granularity != Granularity::subband) {
        throw ValidationError("resource-block view needs a subband-granular realization");
    }
    const auto& g = gains.at(static_cast<std::size_t>(user));
    return g.at(static_cast<std::size_t>(rb / granule_rbs[static_cast<std::size_t>(user)]));
}

std::vector<double> pdp_exponential(int num_taps, double delta)
{
    if (num_taps < 1) {
        throw ValidationError("pdp_exponential: at least one tap is required");
    }
    if (!(delta > 0.0)) {
        throw std::domain_error("pdp_exponential: delay spread must be positive");
    }
    // (1 - e^{-1/delta}) / (1 - e^{-L/delta}), via expm1 for small 1/delta
    const double scale = std::expm1(-1.0 / delta) / std::expm1(-num_taps / delta);
    std::vector<double> pdp(static_cast<std::size_t>(num_taps));
    for (int l = 0; l < num_taps; ++l) {
        pdp[static_cast<std::size_t>(l)] = scale * std::exp(-l / delta);
    }
    return pdp;
}

std::complex<double> subcarrier_correlation(const std::vector<double>& pdp, int n1, int n2,
                                            int num_subcarriers)
{
    if (num_subcarriers < 1) {
        throw ValidationError("subcarrier_correlation: num_subcarriers must be positive");
    }
    std::complex<double> r = 0.0;
    for (std::size_t l = 0; l < pdp.size(); ++l) {
        const double angle = -2.0 * M_PI * static_cast<double>(l) * (n2 - n1) / num_subcarriers;
        r += pdp[l] * std::polar(1.0, angle);
    }
    return r;
}

namespace detail {

CorrelatedGenerator::CorrelatedGenerator(const CorrelatedChannelConfig& cfg)
    : num_subcarriers_(cfg.num_subcarriers)
{
    tap_amplitude_.reserve(cfg.pdp.size());
    for (double p : cfg.pdp) {
        tap_amplitude_.push_back(std::sqrt(p));
    }
    twiddle_.resize(static_cast<std::size_t>(num_subcarriers_));
    for (int m = 0; m < num_subcarriers_; ++m) {
        twiddle_[static_cast<std::size_t>(m)] = std::polar(1.0, -2.0 * M_PI * m / num_subcarriers_);
    }
}

void CorrelatedGenerator::draw(Rng& rng, std::vector<std::complex<double>>& out) const
{
    CircularGaussian gauss;
    const std::size_t taps = tap_amplitude_.size();
    std::complex<double> weight[64];
    std::vector<std::complex<double>> heap;
    std::complex<double>* w = weight;
    if (taps > 64) {
        heap.resize(taps);
        w = heap.data();
    }
    for (std::size_t l = 0; l < taps; ++l) {
        w[l] = tap_amplitude_[l] * gauss(rng);
    }
    out.assign(static_cast<std::size_t>(num_subcarriers_), 0.0);
    const auto mask = static_cast<std::size_t>(num_subcarriers_ - 1);
    for (std::size_t n = 0; n < out.size(); ++n) {
        std::complex<double> h = 0.0;
        for (std::size_t l = 0; l < taps; ++l) {
            h += w[l] * twiddle_[(l * n) & mask];
        }
        out[n] = h;
    }
}

void fill_subband_fading(const SystemConfig& sys, std::uint64_t seed, ChannelRealization& out)
{
    const int users = sys.total_users();
    out.granularity = Granularity::subband;
    out.num_rbs = sys.num_rbs;
    out.granule_rbs.resize(static_cast<std::size_t>(users));
    out.gains.resize(static_cast<std::size_t>(users));
    int k = 0;
    for (int g = 0; g < sys.num_clusters(); ++g) {
        const int width = sys.clusters[static_cast<std::size_t>(g)].subband_size;
        const auto subbands = static_cast<std::size_t>(sys.num_subbands(g));
        for (int i = 0; i < sys.clusters[static_cast<std::size_t>(g)].num_users; ++i, ++k) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
            CircularGaussian gauss;
            auto& row = out.gains[static_cast<std::size_t>(k)];
            row.resize(subbands);
            for (auto& h : row) {
                h = gauss(rng);
            }
            out.granule_rbs[static_cast<std::size_t>(k)] = width;
        }
    }
}

void fill_impairments(const ChannelRealization& draw, const ImpairmentParams& imp,
                      std::uint64_t seed, ImpairedRealization& out)
{
    const double est_scale = std::sqrt(1.0 - imp.est_error_var);
    const double err_scale = std::sqrt(imp.est_error_var);
    const double alpha = imp.delay_corr;
    const double innovation = std::sqrt(1.0 - alpha * alpha);

    out.estimated.granularity = out.actual.granularity = draw.granularity;
    out.estimated.num_rbs = out.actual.num_rbs = draw.num_rbs;
    out.estimated.granule_rbs = draw.granule_rbs;
    out.actual.granule_rbs = draw.granule_rbs;
    out.estimated.gains.resize(draw.gains.size());
    out.actual.gains.resize(draw.gains.size());

    for (std::size_t k = 0; k < draw.gains.size(); ++k) {
        Rng rng(derive_seed(seed, k));
        CircularGaussian gauss;
        const auto& src = draw.gains[k];
        auto& est = out.estimated.gains[k];
        auto& act = out.actual.gains[k];
        est.resize(src.size());
        act.resize(src.size());
        for (std::size_t i = 0; i < src.size(); ++i) {
            // Draw order is fixed (w then eps) so results do not depend on
            // which parameters are zero.
            const std::complex<double> w = err_scale * gauss(rng);
            const std::complex<double> eps = gauss(rng);
            est[i] = est_scale * src[i];
            act[i] = alpha * (est[i] + w) + innovation * eps;
        }
    }
}

} // namespace detail

ChannelRealization gen_correlated_channel(const CorrelatedChannelConfig& cfg, int num_rbs,
                                          int num_users, std::uint64_t seed)
{
    cfg.validate(num_rbs);
    if (num_users < 1) {
        throw ValidationError("gen_correlated_channel: at least one user is required");
    }
    const detail::CorrelatedGenerator gen(cfg);
    ChannelRealization out;
    out.granularity = Granularity::subcarrier;
    out.num_rbs = num_rbs;
    out.granule_rbs.assign(static_cast<std::size_t>(num_users), 0);
    out.gains.resize(static_cast<std::size_t>(num_users));
    for (int k = 0; k < num_users; ++k) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        gen.draw(rng, out.gains[static_cast<std::size_t>(k)]);
    }
    return out;
}

ChannelRealization gen_subband_fading(const SystemConfig& sys, std::uint64_t seed)
{
    sys.validate();
    ChannelRealization out;
    detail::fill_subband_fading(sys, seed, out);
    return out;
}

ImpairedRealization apply_impairments(const ChannelRealization& draw, const ImpairmentParams& imp,
                                      std::uint64_t seed)
{
    imp.validate_ranges();
    ImpairedRealization out;
    detail::fill_impairments(draw, imp, seed, out);
    return out;
}

double conditional_pdf_actual(double x, double chi_hat, const ImpairmentParams& imp)
{
    if (std::isnan(x) || std::isnan(chi_hat) || x < 0.0 || chi_hat < 0.0) {
        throw std::domain_error("conditional_pdf_actual: CQI values must be nonnegative");
    }
    imp.validate();
    const double aw2 = 2.0 / imp.residual_var();
    const double alpha = imp.delay_corr;
    // exp(-aw2 (x + alpha^2 chi_hat) / 2) I0(aw2 alpha sqrt(chi_hat x)), with the
    // Bessel growth folded into the exponent.
    const double root_diff = std::sqrt(x) - alpha * std::sqrt(chi_hat);
    const double bessel_arg = aw2 * alpha * std::sqrt(chi_hat * x);
    return 0.5 * aw2 * std::exp(-0.5 * aw2 * root_diff * root_diff) *
           specfun::bessel_i0_scaled(bessel_arg);
}

} // namespace hetfb
