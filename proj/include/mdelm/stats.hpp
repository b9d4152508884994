#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "mdelm/errors.hpp"

namespace mdelm {

/// Mean and maximum-likelihood standard deviation (1/n denominator).
struct NormalFit {
    double mean = 0.0;
    double stddev = 0.0;
};

inline NormalFit fit_normal(std::span<const double> values) {
    if (values.size() < 2) throw Error("fit_normal: need at least 2 values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

/// Inverse standard-normal CDF.
inline double normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) throw Error("normal_quantile: q must be in (0,1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), q);
}

/// Detection threshold: mean + z(q) * std of a normal fitted to the scores.
inline double fit_normal_threshold(std::span<const double> scores, double quantile) {
    const NormalFit fit = fit_normal(scores);
    if (fit.stddev <= 0.0) throw Error("fit_normal_threshold: zero variance");
    return fit.mean + normal_quantile(quantile) * fit.stddev;
}

struct WelchResult {
    double t = 0.0;
    double p = 1.0;   // two-sided
    double dof = 0.0; // Welch-Satterthwaite
};

/// Welch's two-sample t-test (unequal variances), two-sided p-value.
inline WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
    const std::size_t na = a.size(), nb = b.size();
    if (na < 2 || nb < 2) throw Error("welch_t: each sample needs >= 2 values");
    auto mean_var = [](std::span<const double> x) {
        double m = 0.0;
        for (double v : x) m += v;
        m /= static_cast<double>(x.size());
        double ss = 0.0;
        for (double v : x) ss += (v - m) * (v - m);
        return std::pair<double, double>{m, ss / static_cast<double>(x.size() - 1)};
    };
    const auto [ma, va] = mean_var(a);
    const auto [mb, vb] = mean_var(b);
    const double sa = va / static_cast<double>(na);
    const double sb = vb / static_cast<double>(nb);
    const double se2 = sa + sb;
    if (se2 <= 0.0) throw Error("welch_t: degenerate samples (both variances zero)");

    WelchResult r;
    r.t = (ma - mb) / std::sqrt(se2);
    r.dof = se2 * se2 /
            (sa * sa / static_cast<double>(na - 1) + sb * sb / static_cast<double>(nb - 1));
    const boost::math::students_t_distribution<double> dist(r.dof);
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    return r;
}

}  // namespace mdelm
