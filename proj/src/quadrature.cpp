#include "hetfb/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "hetfb/errors.hpp"

namespace hetfb::numerics {

namespace {

constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd Kronrod nodes (1, 3, 5, 7).
constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double lo;
    double hi;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod(const Integrand& f, double lo, double hi)
{
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double kronrod = fc * kronrod_weights[7];
    double gauss = fc * gauss_weights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kronrod_nodes[j];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kronrod_weights[j] * pair;
        if (j % 2 == 1) {
            gauss += gauss_weights[j / 2] * pair;
        }
    }
    kronrod *= half;
    gauss *= half;
    return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

} // namespace

QuadratureResult integrate(const Integrand& f, double lo, double hi, const QuadratureOptions& opts)
{
    if (!(hi >= lo)) {
        throw ValidationError("integrate: upper limit below lower limit");
    }
    if (hi == lo) {
        return {};
    }

    std::priority_queue<Panel> panels;
    Panel first = gauss_kronrod(f, lo, hi);
    double total = first.value;
    double total_error = first.error;
    int evaluations = 15;
    panels.push(first);

    // Panels narrower than this cannot be refined meaningfully.
    const double min_width = 64.0 * std::numeric_limits<double>::epsilon() *
                             std::max(std::abs(lo), std::abs(hi));
    std::vector<Panel> floor_limited;

    while (total_error > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
        if (panels.empty()) {
            break; // every remaining panel sits at the rounding floor
        }
        if (static_cast<int>(panels.size() + floor_limited.size()) >= opts.max_intervals) {
            std::ostringstream msg;
            msg << "adaptive quadrature did not converge on [" << lo << ", " << hi
                << "]: estimate " << total << ", error " << total_error;
            throw NumericalError(msg.str());
        }
        const Panel worst = panels.top();
        panels.pop();
        if (worst.hi - worst.lo <= min_width) {
            floor_limited.push_back(worst);
            continue;
        }
        const double mid = 0.5 * (worst.lo + worst.hi);
        const Panel left = gauss_kronrod(f, worst.lo, mid);
        const Panel right = gauss_kronrod(f, mid, worst.hi);
        evaluations += 30;
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
    }

    // Re-sum to shed the drift accumulated by incremental updates.
    CompensatedSum<double> sum;
    CompensatedSum<double> err;
    for (const Panel& p : floor_limited) {
        sum.add(p.value);
        err.add(p.error);
    }
    while (!panels.empty()) {
        sum.add(panels.top().value);
        err.add(panels.top().error);
        panels.pop();
    }
    return {sum.value(), err.value(), evaluations};
}

QuadratureResult integrate_to_infinity(const Integrand& f, double lo, double min_extent,
                                       const QuadratureOptions& opts)
{
    if (!(min_extent > 0.0)) {
        throw ValidationError("integrate_to_infinity: min_extent must be positive");
    }
    QuadratureResult bulk = integrate(f, lo, lo + min_extent, opts);
    double start = lo + min_extent;
    double width = 0.5 * min_extent;
    for (int panel = 0; panel < 60; ++panel) {
        const QuadratureResult part = integrate(f, start, start + width, opts);
        bulk.value += part.value;
        bulk.error += part.error;
        bulk.evaluations += part.evaluations;
        if (std::abs(part.value) <= 0.01 * opts.abs_tol) {
            return bulk;
        }
        start += width;
        width *= 2.0;
    }
    throw NumericalError("integrate_to_infinity: integrand does not decay");
}

} // namespace hetfb::numerics
