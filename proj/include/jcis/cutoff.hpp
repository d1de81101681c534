#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jcis/errors.hpp"

namespace jcis {

/// Result of the adjacent-ratio cutoff rule: keep the d_hat highest-scoring
/// pairs. achieved_ratio is scores[d_hat] / scores[d_hat + 1] in 1-based
/// descending order; score_at_cut is the last retained score.
struct CutoffEstimate {
    std::size_t d_hat = 0;
    double achieved_ratio = 0.0;
    double score_at_cut = 0.0;
    std::size_t search_bound = 0;
    double floor_used = 0.0;
};

/// Picks the cut index maximizing the ratio of adjacent scores in a
/// descending-sorted list. Ratios are only considered where the leading
/// score is at least `floor`; without the floor, a pair of minuscule
/// trailing scores can produce an enormous ratio and swallow the whole
/// list. Ratio ties go to the smallest index; a zero successor counts as an
/// infinite ratio, the strongest possible cut signal.
///
/// Defaults: search_bound = length - 1 (callers that know the sample size n
/// should pass min(length - 1, n)); floor = median of the examined scores.
/// Pass floor = 0 and search_bound = length - 1 for the unguarded textbook
/// rule.
inline CutoffEstimate estimate_cutoff(std::span<const double> sorted_scores,
                                      std::optional<std::size_t> search_bound = std::nullopt,
                                      std::optional<double> floor = std::nullopt) {
    const std::size_t len = sorted_scores.size();
    if (len < 2) throw data_error("estimate_cutoff: need at least 2 scores, have " + std::to_string(len));
    for (std::size_t i = 0; i < len; ++i) {
        if (!(sorted_scores[i] >= 0.0))
            throw data_error("estimate_cutoff: negative or non-finite score at position " +
                             std::to_string(i + 1));
        if (i > 0 && sorted_scores[i] > sorted_scores[i - 1])
            throw data_error("estimate_cutoff: scores not in descending order at position " +
                             std::to_string(i + 1) + "; refusing to sort implicitly");
    }

    std::size_t bound = search_bound.value_or(len - 1);
    bound = std::min(bound, len - 1);
    if (bound == 0) throw data_error("estimate_cutoff: search bound must be at least 1");

    double floor_value;
    if (floor) {
        floor_value = *floor;
    } else {
        // Median of the scores whose ratio positions are examined.
        std::vector<double> examined(sorted_scores.begin(), sorted_scores.begin() + bound);
        std::sort(examined.begin(), examined.end());
        const std::size_t mid = examined.size() / 2;
        floor_value = (examined.size() % 2 == 1)
                          ? examined[mid]
                          : 0.5 * (examined[mid - 1] + examined[mid]);
    }

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    double best_ratio = -1.0;
    for (std::size_t j = 1; j <= bound; ++j) {
        const double lead = sorted_scores[j - 1];
        if (lead < floor_value) break; // descending: everything after is below the floor too
        const double next = sorted_scores[j];
        const double ratio = (next == 0.0) ? kInf : lead / next;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best_j = j;
        }
    }
    if (best_j == 0)
        throw degenerate_error(
            "estimate_cutoff: every examined score lies below the floor; pick a cutoff manually "
            "(or rerun with a lower --floor)");

    return {best_j, best_ratio, sorted_scores[best_j - 1], bound, floor_value};
}

} // namespace jcis
