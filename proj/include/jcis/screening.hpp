#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "jcis/dataset.hpp"
#include "jcis/errors.hpp"
#include "jcis/moments.hpp"

namespace jcis {

enum class PairRestriction { all_pairs, within_group };

/// One evaluated covariate pair, canonically oriented (j1 < j2).
struct PairScore {
    std::uint32_t j1 = 0;
    std::uint32_t j2 = 0;
    double r_hat = 0.0;
};

/// Strict total order on pairs: score descending, then (j1, j2) ascending.
/// Equal scores are broken lexicographically so that ranks are well defined
/// and runs are reproducible.
inline bool score_order(const PairScore& a, const PairScore& b) noexcept {
    if (a.r_hat != b.r_hat) return a.r_hat > b.r_hat;
    if (a.j1 != b.j1) return a.j1 < b.j1;
    return a.j2 < b.j2;
}

struct SkippedColumn {
    std::uint32_t index = 0;
    std::string reason;
};

struct ScreenResult {
    std::vector<PairScore> scores;              // sorted under score_order
    std::vector<SkippedColumn> skipped_columns; // excluded from every pair
    PairRestriction restriction = PairRestriction::all_pairs;
    std::optional<std::size_t> top_k;
    std::size_t n = 0;
    std::size_t pairs_evaluated = 0;
    int workers = 1;
    std::vector<std::string> column_names;
};

/// Streams every unordered pair (j1 < j2) in lexicographic order, filtered
/// by the restriction. Group ids are required for within_group.
template <typename Fn>
void for_each_pair(std::size_t p, PairRestriction restriction,
                   const std::optional<std::vector<std::int32_t>>& groups, Fn&& fn) {
    if (p < 2) throw data_error("enumerate_pairs: need at least 2 columns");
    if (restriction == PairRestriction::within_group && !groups)
        throw config_error("within-group pair enumeration requires group labels");
    for (std::size_t j1 = 0; j1 + 1 < p; ++j1) {
        for (std::size_t j2 = j1 + 1; j2 < p; ++j2) {
            if (restriction == PairRestriction::within_group && (*groups)[j1] != (*groups)[j2])
                continue;
            fn(static_cast<std::uint32_t>(j1), static_cast<std::uint32_t>(j2));
        }
    }
}

/// Materialized pair list; convenient for tests and small p.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> enumerate_pairs(
    std::size_t p, PairRestriction restriction,
    const std::optional<std::vector<std::int32_t>>& groups = std::nullopt) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for_each_pair(p, restriction, groups,
                  [&](std::uint32_t a, std::uint32_t b) { pairs.emplace_back(a, b); });
    return pairs;
}

namespace detail {

/// Bounded collector holding the k best entries under score_order; the heap
/// front is the worst kept entry. Memory stays O(k) no matter how many
/// pairs stream through.
class TopKHeap {
public:
    explicit TopKHeap(std::size_t k) : k_(k) { entries_.reserve(k > 0 ? k + 1 : 0); }

    void offer(const PairScore& e) {
        if (k_ == 0) return;
        if (entries_.size() < k_) {
            entries_.push_back(e);
            std::push_heap(entries_.begin(), entries_.end(), score_order);
        } else if (score_order(e, entries_.front())) {
            std::pop_heap(entries_.begin(), entries_.end(), score_order);
            entries_.back() = e;
            std::push_heap(entries_.begin(), entries_.end(), score_order);
        }
    }

    std::vector<PairScore>& entries() { return entries_; }

private:
    std::size_t k_;
    std::vector<PairScore> entries_;
};

} // namespace detail

/// Evaluates the pair score for every enumerated pair whose columns are both
/// non-constant. Constant columns are recorded in skipped_columns and all
/// their pairs omitted; a constant response aborts the run.
///
/// Work is partitioned dynamically by leading column: workers pull the next
/// unprocessed j1 from a shared counter and evaluate all its pairs. Each
/// pair's score is a pure function of the shared column summaries, and the
/// merge step sorts every collected entry under the global total order, so
/// the result is bit-identical for any worker count and any scheduling.
///
/// workers <= 0 selects the hardware concurrency.
inline ScreenResult screen(const Dataset& ds, PairRestriction restriction,
                           std::optional<std::size_t> top_k = std::nullopt, int workers = 1) {
    ds.validate();
    if (restriction == PairRestriction::within_group && !ds.groups)
        throw config_error("within-group screening requires group labels (see load_groups)");

    const MomentSummary response_summary = column_summary(ds.response);
    if (response_summary.is_constant())
        throw degenerate_error("screen: response has zero variance");

    ScreenResult result;
    result.restriction = restriction;
    result.top_k = top_k;
    result.n = ds.n;
    result.column_names = ds.column_names;

    std::vector<MomentSummary> summaries(ds.p);
    std::vector<char> usable(ds.p, 0);
    std::size_t usable_count = 0;
    for (std::size_t j = 0; j < ds.p; ++j) {
        summaries[j] = column_summary(ds.column(j));
        if (summaries[j].is_constant()) {
            result.skipped_columns.push_back({static_cast<std::uint32_t>(j), "zero variance"});
        } else {
            usable[j] = 1;
            ++usable_count;
        }
    }
    if (usable_count == 0)
        throw degenerate_error("screen: all covariate columns are constant; nothing to rank");

    int worker_count = workers;
    if (worker_count <= 0) worker_count = static_cast<int>(std::thread::hardware_concurrency());
    if (worker_count < 1) worker_count = 1;
    result.workers = worker_count;

    // Per-group member lists let within_group skip straight to same-group
    // partners instead of filtering the full j2 range.
    std::vector<std::vector<std::uint32_t>> group_members;
    if (restriction == PairRestriction::within_group) {
        group_members.resize(ds.group_names.size());
        for (std::size_t j = 0; j < ds.p; ++j)
            group_members[static_cast<std::size_t>((*ds.groups)[j])].push_back(
                static_cast<std::uint32_t>(j));
    }

    const std::span<const double> y(ds.response.data(), ds.n);
    std::atomic<std::uint32_t> next_j1{0};
    std::vector<std::vector<PairScore>> collected(static_cast<std::size_t>(worker_count));
    std::vector<std::size_t> evaluated(static_cast<std::size_t>(worker_count), 0);

    const auto worker_body = [&](int w) {
        detail::TopKHeap heap(top_k ? *top_k : 0);
        std::vector<PairScore>& full = collected[static_cast<std::size_t>(w)];
        std::size_t count = 0;

        const auto eval_pair = [&](std::uint32_t j1, std::uint32_t j2) {
            const double r = pair_score_from_summaries(ds.column(j1), ds.column(j2), y,
                                                       summaries[j1], summaries[j2],
                                                       response_summary);
            ++count;
            const PairScore entry{j1, j2, r};
            if (top_k)
                heap.offer(entry);
            else
                full.push_back(entry);
        };

        for (;;) {
            const std::uint32_t j1 = next_j1.fetch_add(1, std::memory_order_relaxed);
            if (j1 >= ds.p) break;
            if (!usable[j1]) continue;
            if (restriction == PairRestriction::all_pairs) {
                for (std::uint32_t j2 = j1 + 1; j2 < ds.p; ++j2) {
                    if (usable[j2]) eval_pair(j1, j2);
                }
            } else {
                const auto& members = group_members[static_cast<std::size_t>((*ds.groups)[j1])];
                auto it = std::upper_bound(members.begin(), members.end(), j1);
                for (; it != members.end(); ++it) {
                    if (usable[*it]) eval_pair(j1, *it);
                }
            }
        }

        if (top_k) full = std::move(heap.entries());
        evaluated[static_cast<std::size_t>(w)] = count;
    };

    if (worker_count == 1) {
        worker_body(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(worker_count));
        for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker_body, w);
        for (auto& t : pool) t.join();
    }

    std::size_t total = 0;
    for (const auto& v : collected) total += v.size();
    result.scores.reserve(total);
    for (auto& v : collected) {
        result.scores.insert(result.scores.end(), v.begin(), v.end());
        v.clear();
        v.shrink_to_fit();
    }
    std::sort(result.scores.begin(), result.scores.end(), score_order);
    if (top_k && result.scores.size() > *top_k) result.scores.resize(*top_k);

    for (std::size_t e : evaluated) result.pairs_evaluated += e;
    return result;
}

/// 1-based position of the canonicalized pair in the sorted list; empty when
/// the pair was skipped, filtered out by the restriction, or truncated away.
inline std::optional<std::size_t> rank_of_pair(const ScreenResult& result, std::uint32_t j1,
                                               std::uint32_t j2) {
    if (j1 > j2) std::swap(j1, j2);
    for (std::size_t i = 0; i < result.scores.size(); ++i) {
        if (result.scores[i].j1 == j1 && result.scores[i].j2 == j2) return i + 1;
    }
    return std::nullopt;
}

} // namespace jcis
