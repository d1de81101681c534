#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "jcis/errors.hpp"

namespace jcis {

/// Per-column first/second moment summary. `centered_sq_sum` is the raw sum
/// of squared deviations (not divided by n); it is zero iff the column is
/// constant.
struct MomentSummary {
    double mean = 0.0;
    double centered_sq_sum = 0.0;

    [[nodiscard]] bool is_constant() const noexcept { return centered_sq_sum == 0.0; }
};

namespace detail {

/// Deterministic blocked pairwise reduction of term(i) over [lo, hi) in
/// long double. The split tree depends only on the index range, so the
/// result is bit-identical no matter who calls it or in what order pairs
/// are scheduled; rounding error grows O(log n) instead of O(n).
template <typename Term>
long double pairwise_sum(std::size_t lo, std::size_t hi, const Term& term) {
    constexpr std::size_t kBlock = 128;
    if (hi - lo <= kBlock) {
        long double acc = 0.0L;
        for (std::size_t i = lo; i < hi; ++i) acc += term(i);
        return acc;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term);
}

inline void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw data_error(std::string(what) + ": non-finite value");
    }
}

inline void require_triple(std::span<const double> x1, std::span<const double> x2,
                           std::span<const double> y) {
    if (x1.size() != x2.size() || x1.size() != y.size())
        throw data_error("vector lengths differ: " + std::to_string(x1.size()) + ", " +
                         std::to_string(x2.size()) + ", " + std::to_string(y.size()));
    if (x1.size() < 3)
        throw data_error("need at least 3 observations, have " + std::to_string(x1.size()));
    require_finite(x1, "x1");
    require_finite(x2, "x2");
    require_finite(y, "y");
}

/// Sum of (x1[i]-m1)(x2[i]-m2)(y[i]-my). Deviations and products are formed
/// in long double; the expression is symmetric in (x1,m1) <-> (x2,m2)
/// because IEEE multiplication commutes, so swapping the covariates gives a
/// bit-identical result.
inline long double centered_triple_sum(std::span<const double> x1, std::span<const double> x2,
                                       std::span<const double> y, double m1, double m2,
                                       double my) {
    const long double c1 = m1;
    const long double c2 = m2;
    const long double cy = my;
    return pairwise_sum(0, y.size(), [&](std::size_t i) {
        return (x1[i] - c1) * (x2[i] - c2) * (y[i] - cy);
    });
}

} // namespace detail

/// Two-pass mean and centered sum of squares. The mean is fixed first and
/// the deviations are accumulated against it, which keeps the result
/// accurate even when the column has a large common offset.
inline MomentSummary column_summary(std::span<const double> x) {
    if (x.empty()) throw data_error("column_summary: empty input");
    detail::require_finite(x, "column_summary");
    const long double sum =
        detail::pairwise_sum(0, x.size(), [&](std::size_t i) -> long double { return x[i]; });
    const double mean = static_cast<double>(sum / static_cast<long double>(x.size()));
    const long double m = mean;
    const long double css = detail::pairwise_sum(0, x.size(), [&](std::size_t i) {
        const long double d = x[i] - m;
        return d * d;
    });
    return {mean, static_cast<double>(css)};
}

/// Sample three-way joint cumulant
///     (1/n) sum_i (x1_i - mean(x1)) (x2_i - mean(x2)) (y_i - mean(y)),
/// signed. Zero in expectation whenever one argument is independent of the
/// other two, which is what makes it usable as an interaction signal.
inline double joint_cumulant(std::span<const double> x1, std::span<const double> x2,
                             std::span<const double> y) {
    detail::require_triple(x1, x2, y);
    const double m1 = column_summary(x1).mean;
    const double m2 = column_summary(x2).mean;
    const double my = column_summary(y).mean;
    const long double s = detail::centered_triple_sum(x1, x2, y, m1, m2, my);
    return static_cast<double>(s / static_cast<long double>(y.size()));
}

/// Same quantity as joint_cumulant, but evaluated through the eight-summand
/// raw-moment expansion of the centered product, each summand a separate
/// pass. Algebraically identical for any fixed means; numerically it takes
/// a completely different route, which is exactly what makes it useful as a
/// cross-check. Do not use it as the production path: the uncentered
/// summands cancel against each other and shed precision.
inline double joint_cumulant_expanded(std::span<const double> x1, std::span<const double> x2,
                                      std::span<const double> y) {
    detail::require_triple(x1, x2, y);
    const std::size_t n = y.size();
    const long double inv_n = 1.0L / static_cast<long double>(n);
    const long double m1 = column_summary(x1).mean;
    const long double m2 = column_summary(x2).mean;
    const long double my = column_summary(y).mean;

    const auto mean_of = [&](auto&& term) {
        return detail::pairwise_sum(0, n, term) * inv_n;
    };

    const long double t_xxy = mean_of([&](std::size_t i) -> long double {
        return static_cast<long double>(x1[i]) * x2[i] * y[i];
    });
    const long double t_m1xy = mean_of([&](std::size_t i) -> long double { return m1 * x2[i] * y[i]; });
    const long double t_xm2y = mean_of([&](std::size_t i) -> long double { return x1[i] * m2 * y[i]; });
    const long double t_xxmy = mean_of([&](std::size_t i) -> long double { return static_cast<long double>(x1[i]) * x2[i] * my; });
    const long double t_m1m2y = mean_of([&](std::size_t i) -> long double { return m1 * m2 * y[i]; });
    const long double t_m1xmy = mean_of([&](std::size_t i) -> long double { return m1 * x2[i] * my; });
    const long double t_xm2my = mean_of([&](std::size_t i) -> long double { return x1[i] * m2 * my; });
    const long double t_m1m2my = mean_of([&](std::size_t) -> long double { return m1 * m2 * my; });

    return static_cast<double>(t_xxy - t_m1xy - t_xm2y - t_xxmy + t_m1m2y + t_m1xmy + t_xm2my -
                               t_m1m2my);
}

/// Normalized pair score computed from precomputed column summaries:
///     sqrt(n) |sum (x1-m1)(x2-m2)(y-my)| / sqrt(css1 * css2 * cssy).
/// Always >= 0 and finite when every summary has positive variance. The
/// screening engine calls this with summaries computed once per column;
/// the result is bit-identical to recomputing them per pair because the
/// same narrowed means are used either way.
inline double pair_score_from_summaries(std::span<const double> x1, std::span<const double> x2,
                                        std::span<const double> y, const MomentSummary& s1,
                                        const MomentSummary& s2, const MomentSummary& sy) {
    const long double num = detail::centered_triple_sum(x1, x2, y, s1.mean, s2.mean, sy.mean);
    const long double denom =
        std::sqrt(static_cast<long double>(s1.centered_sq_sum) * s2.centered_sq_sum *
                  sy.centered_sq_sum);
    const long double root_n = std::sqrt(static_cast<long double>(y.size()));
    return static_cast<double>(root_n * std::fabs(num) / denom);
}

/// Normalized pair score for a single (x1, x2, y) triple. A constant
/// argument has no scale to normalize by and is rejected.
inline double pair_score(std::span<const double> x1, std::span<const double> x2,
                         std::span<const double> y) {
    detail::require_triple(x1, x2, y);
    const MomentSummary s1 = column_summary(x1);
    if (s1.is_constant()) throw degenerate_error("pair_score: first covariate has zero variance");
    const MomentSummary s2 = column_summary(x2);
    if (s2.is_constant()) throw degenerate_error("pair_score: second covariate has zero variance");
    const MomentSummary sy = column_summary(y);
    if (sy.is_constant()) throw degenerate_error("pair_score: response has zero variance");
    return pair_score_from_summaries(x1, x2, y, s1, s2, sy);
}

} // namespace jcis
