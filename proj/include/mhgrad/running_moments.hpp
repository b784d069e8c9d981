#pragma once

#include <cstdint>
#include <stdexcept>

namespace mhgrad {

// Welford accumulator for mean and sum of squared deviations.  merge() uses
// the pairwise (Chan et al.) combination rule, so moments accumulated on
// disjoint slices can be joined in any grouping; the result matches a
// single-pass accumulation to ~1e-12 relative.
struct RunningMoments {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const RunningMoments& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n);
        const double nb = static_cast<double>(o.n);
        const double d = o.mean - mean;
        const double nt = na + nb;
        mean += d * (nb / nt);
        m2 += o.m2 + d * d * (na * nb / nt);
        n += o.n;
    }

    double variance() const {
        if (n < 2) throw std::invalid_argument("RunningMoments: variance needs n >= 2");
        return m2 / static_cast<double>(n - 1);
    }
};

// Paired second-moment accumulator for (g_path, g_mall) streams: marginal
// variances plus the cross term, mergeable the same way.
struct PairedMoments {
    std::int64_t n = 0;
    double mean_p = 0.0;
    double mean_m = 0.0;
    double m2_p = 0.0;
    double m2_m = 0.0;
    double cm = 0.0; // sum of cross deviations

    void push(double p, double m) {
        ++n;
        const double nn = static_cast<double>(n);
        const double dp = p - mean_p;
        const double dm = m - mean_m;
        mean_p += dp / nn;
        mean_m += dm / nn;
        m2_p += dp * (p - mean_p);
        m2_m += dm * (m - mean_m);
        cm += dp * (m - mean_m);
    }

    void merge(const PairedMoments& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n);
        const double nb = static_cast<double>(o.n);
        const double nt = na + nb;
        const double dp = o.mean_p - mean_p;
        const double dm = o.mean_m - mean_m;
        mean_p += dp * (nb / nt);
        mean_m += dm * (nb / nt);
        m2_p += o.m2_p + dp * dp * (na * nb / nt);
        m2_m += o.m2_m + dm * dm * (na * nb / nt);
        cm += o.cm + dp * dm * (na * nb / nt);
        n += o.n;
    }

    double var_p() const { return m2_p / static_cast<double>(n - 1); }
    double var_m() const { return m2_m / static_cast<double>(n - 1); }
    double cov() const { return cm / static_cast<double>(n - 1); }
};

} // namespace mhgrad
