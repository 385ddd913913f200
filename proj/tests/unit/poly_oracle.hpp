#pragma once

// Exact-rational reference expansions built straight from order statistics,
// independent of the library's coefficient recursions.

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hetfb/system.hpp"

using Rational = boost::multiprecision::cpp_rational;
using RationalPoly = std::vector<Rational>; // index = power of F

inline int cluster_quota(const hetfb::SystemConfig& sys, int g)
{
    return sys.largest_subband() / sys.clusters[g].subband_size * sys.base_best_m;
}

inline double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

inline RationalPoly poly_mul(const RationalPoly& a, const RationalPoly& b)
{
    RationalPoly out(a.size() + b.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

inline RationalPoly poly_pow(const RationalPoly& a, int k)
{
    RationalPoly out{Rational(1)};
    for (int i = 0; i < k; ++i) {
        out = poly_mul(out, a);
    }
    return out;
}

inline Rational binom_q(int n, int k)
{
    Rational c = 1;
    for (int i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
    }
    return c;
}

/// P(reported <= x) as a polynomial in F = F_Z(x): the reported value is a
/// uniform pick among the M' largest of n CQIs, so
/// P = sum_{i < M'} (M' - i)/M' C(n, i) (1 - F)^i F^(n - i).
inline RationalPoly exact_reported_poly(int n, int quota)
{
    RationalPoly total(n + 1, Rational(0));
    const RationalPoly one_minus_f{Rational(1), Rational(-1)};
    for (int i = 0; i < quota; ++i) {
        RationalPoly term = poly_pow(one_minus_f, i);
        RationalPoly shifted(term.size() + (n - i), Rational(0));
        for (std::size_t j = 0; j < term.size(); ++j) {
            shifted[j + (n - i)] = term[j];
        }
        const Rational w = Rational(quota - i, quota) * binom_q(n, i);
        for (std::size_t j = 0; j < shifted.size(); ++j) {
            total[j] += w * shifted[j];
        }
    }
    return total;
}

inline RationalPoly exact_conditional_cdf_poly(const hetfb::SystemConfig& sys, const std::vector<int>& tau)
{
    RationalPoly out{Rational(1)};
    for (int g = 0; g < sys.num_clusters(); ++g) {
        const RationalPoly rep = exact_reported_poly(sys.num_subbands(g), cluster_quota(sys, g));
        out = poly_mul(out, poly_pow(rep, tau[g]));
    }
    return out;
}

/// Unconditional CDF of the scheduled CQI: prod_g (1 - p + p F_g)^(K_g).
inline RationalPoly exact_scheduled_cdf_poly(const hetfb::SystemConfig& sys)
{
    const Rational p(sys.largest_subband() * sys.base_best_m, sys.num_rbs);
    RationalPoly out{Rational(1)};
    for (int g = 0; g < sys.num_clusters(); ++g) {
        RationalPoly base = exact_reported_poly(sys.num_subbands(g), cluster_quota(sys, g));
        for (auto& c : base) {
            c *= p;
        }
        base[0] += 1 - p;
        out = poly_mul(out, poly_pow(base, sys.clusters[g].num_users));
    }
    return out;
}
