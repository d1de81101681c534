#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "jcis/dataset.hpp"
#include "jcis/errors.hpp"
#include "jcis/moments.hpp"
#include "jcis/rng.hpp"

namespace jcis {

enum class ThresholdMode { classic_t1, adjusted };
enum class CellRisk { high, low, unknown };

/// Arithmetic mean of sensitivity and specificity. Undefined when either
/// class is empty.
inline double balanced_accuracy(std::size_t tp, std::size_t fn, std::size_t tn, std::size_t fp) {
    if (tp + fn == 0) throw degenerate_error("balanced_accuracy: no positive cases (tp + fn = 0)");
    if (tn + fp == 0) throw degenerate_error("balanced_accuracy: no negative cases (tn + fp = 0)");
    const double sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
    return 0.5 * (sensitivity + specificity);
}

struct MdrConfig {
    std::size_t k = 2;
    std::size_t folds = 10;
    std::vector<std::uint32_t> candidate_columns;
    ThresholdMode threshold_mode = ThresholdMode::adjusted;
    std::uint64_t seed = 1;
};

struct GenotypeCell {
    std::vector<double> genotype; // one value per locus, in loci order
    std::size_t cases = 0;
    std::size_t controls = 0;
    CellRisk risk = CellRisk::unknown;
};

struct MdrModel {
    std::vector<std::uint32_t> loci; // sorted ascending
    std::vector<std::string> locus_names;
    std::vector<GenotypeCell> cells; // genotype-lexicographic order
    std::vector<double> fold_balanced_accuracies;
    double cv_balanced_accuracy = 0.0;
    ThresholdMode threshold_mode = ThresholdMode::adjusted;
    double threshold = 1.0; // the T applied in the full-data fit
    std::size_t subsets_evaluated = 0;
};

namespace detail {

struct CellCounts {
    std::size_t cases = 0;
    std::size_t controls = 0;
};

using CellMap = std::map<std::vector<double>, CellCounts>;

inline void require_binary_response(const Dataset& ds) {
    for (double v : ds.response) {
        if (v != 0.0 && v != 1.0)
            throw data_error("mdr: response must be binary 0/1, found " + std::to_string(v));
    }
}

/// Risk rule: a cell is high when cases/controls exceeds T strictly; a cell
/// with at least one case and no controls is high (infinite ratio); a cell
/// whose ratio equals T exactly is low.
inline CellRisk classify_cell(const CellCounts& c, double threshold) {
    if (c.cases >= 1 && c.controls == 0) return CellRisk::high;
    if (c.cases == 0 && c.controls == 0) return CellRisk::unknown;
    const double ratio = static_cast<double>(c.cases) / static_cast<double>(c.controls);
    return ratio > threshold ? CellRisk::high : CellRisk::low;
}

inline double resolve_threshold(ThresholdMode mode, std::size_t total_cases,
                                std::size_t total_controls) {
    if (mode == ThresholdMode::classic_t1) return 1.0;
    if (total_controls == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(total_cases) / static_cast<double>(total_controls);
}

template <typename RowPredicate>
CellMap count_cells(const Dataset& ds, const std::vector<std::uint32_t>& loci,
                    const RowPredicate& include, std::size_t& total_cases,
                    std::size_t& total_controls) {
    CellMap cells;
    std::vector<double> key(loci.size());
    total_cases = total_controls = 0;
    for (std::size_t i = 0; i < ds.n; ++i) {
        if (!include(i)) continue;
        for (std::size_t t = 0; t < loci.size(); ++t) key[t] = ds.column(loci[t])[i];
        CellCounts& c = cells[key];
        if (ds.response[i] == 1.0) {
            ++c.cases;
            ++total_cases;
        } else {
            ++c.controls;
            ++total_controls;
        }
    }
    return cells;
}

} // namespace detail

/// Labels every genotype combination observed in the dataset high or low by
/// its case:control ratio against the threshold mode. Combinations that are
/// possible (cartesian product of observed per-locus values) but absent from
/// the data are reported with an explicit unknown label.
inline std::vector<GenotypeCell> fit_mdr_cells(const Dataset& ds,
                                               const std::vector<std::uint32_t>& loci,
                                               ThresholdMode mode,
                                               double* threshold_out = nullptr) {
    detail::require_binary_response(ds);
    if (loci.empty()) throw config_error("fit_mdr_cells: no loci given");
    for (std::uint32_t j : loci)
        if (j >= ds.p) throw config_error("fit_mdr_cells: locus index out of range");

    std::size_t total_cases = 0, total_controls = 0;
    const detail::CellMap counts =
        detail::count_cells(ds, loci, [](std::size_t) { return true; }, total_cases, total_controls);
    const double threshold = detail::resolve_threshold(mode, total_cases, total_controls);
    if (threshold_out) *threshold_out = threshold;

    // Observed value set per locus, to enumerate the full genotype grid.
    std::vector<std::vector<double>> levels(loci.size());
    for (std::size_t t = 0; t < loci.size(); ++t) {
        std::vector<double> vals(ds.column(loci[t]).begin(), ds.column(loci[t]).end());
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        levels[t] = std::move(vals);
    }

    std::vector<GenotypeCell> cells;
    std::vector<std::size_t> idx(loci.size(), 0);
    for (;;) {
        GenotypeCell cell;
        cell.genotype.resize(loci.size());
        for (std::size_t t = 0; t < loci.size(); ++t) cell.genotype[t] = levels[t][idx[t]];
        if (const auto it = counts.find(cell.genotype); it != counts.end()) {
            cell.cases = it->second.cases;
            cell.controls = it->second.controls;
            cell.risk = detail::classify_cell(it->second, threshold);
        }
        cells.push_back(std::move(cell));

        std::size_t t = loci.size();
        while (t-- > 0) {
            if (++idx[t] < levels[t].size()) break;
            idx[t] = 0;
            if (t == 0) return cells;
        }
    }
}

/// Exhaustive k-subset search over the candidate columns with stratified,
/// seeded cross-validation. Per subset and fold: fit cells on the training
/// rows, classify the held-out rows (unknown cells count as low risk), score
/// with balanced accuracy. The subset with the best mean fold BA wins; ties
/// go to the lexicographically smallest loci tuple.
inline MdrModel cross_validated_mdr(const Dataset& ds, const MdrConfig& cfg, int workers = 1) {
    ds.validate();
    detail::require_binary_response(ds);
    if (cfg.candidate_columns.empty()) throw config_error("mdr: candidate set is empty");
    std::vector<std::uint32_t> candidates = cfg.candidate_columns;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (std::uint32_t j : candidates) {
        if (j >= ds.p) throw config_error("mdr: candidate column index " + std::to_string(j) + " out of range");
        if (column_summary(ds.column(j)).is_constant())
            throw degenerate_error("mdr: candidate column '" + ds.column_names[j] + "' is constant");
    }
    if (cfg.k < 1 || cfg.k > candidates.size())
        throw config_error("mdr: k = " + std::to_string(cfg.k) + " outside 1.." +
                           std::to_string(candidates.size()));
    if (cfg.folds < 2 || cfg.folds > ds.n)
        throw config_error("mdr: folds must lie in 2..n");

    // Stratified fold assignment: shuffle cases and controls separately,
    // deal round-robin. Preserves the case:control ratio per fold.
    std::vector<std::size_t> case_rows, control_rows;
    for (std::size_t i = 0; i < ds.n; ++i)
        (ds.response[i] == 1.0 ? case_rows : control_rows).push_back(i);
    SplitRng fold_rng(derive_seed(cfg.seed, 0x6D6472ULL /* "mdr" */, cfg.folds));
    const auto shuffle = [&](std::vector<std::size_t>& rows) {
        for (std::size_t i = rows.size(); i > 1; --i)
            std::swap(rows[i - 1], rows[fold_rng.next_below(i)]);
    };
    shuffle(case_rows);
    shuffle(control_rows);
    std::vector<std::size_t> fold_of(ds.n, 0);
    for (std::size_t i = 0; i < case_rows.size(); ++i) fold_of[case_rows[i]] = i % cfg.folds;
    for (std::size_t i = 0; i < control_rows.size(); ++i) fold_of[control_rows[i]] = i % cfg.folds;

    for (std::size_t f = 0; f < cfg.folds; ++f) {
        std::size_t fold_cases = 0, fold_controls = 0;
        for (std::size_t i = 0; i < ds.n; ++i) {
            if (fold_of[i] != f) continue;
            (ds.response[i] == 1.0 ? fold_cases : fold_controls)++;
        }
        if (fold_cases == 0 || fold_controls == 0)
            throw degenerate_error("mdr: fold " + std::to_string(f + 1) +
                                   " has a single class; reduce the fold count");
    }

    struct Evaluation {
        std::vector<std::uint32_t> loci;
        std::vector<double> fold_bas;
        double cv_ba = -1.0;
    };

    const auto evaluate_subset = [&](const std::vector<std::uint32_t>& loci) {
        Evaluation ev;
        ev.loci = loci;
        ev.fold_bas.reserve(cfg.folds);
        std::vector<double> key(loci.size());
        for (std::size_t f = 0; f < cfg.folds; ++f) {
            std::size_t train_cases = 0, train_controls = 0;
            const detail::CellMap cells = detail::count_cells(
                ds, loci, [&](std::size_t i) { return fold_of[i] != f; }, train_cases,
                train_controls);
            const double threshold =
                detail::resolve_threshold(cfg.threshold_mode, train_cases, train_controls);
            std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
            for (std::size_t i = 0; i < ds.n; ++i) {
                if (fold_of[i] != f) continue;
                for (std::size_t t = 0; t < loci.size(); ++t) key[t] = ds.column(loci[t])[i];
                CellRisk risk = CellRisk::unknown;
                if (const auto it = cells.find(key); it != cells.end())
                    risk = detail::classify_cell(it->second, threshold);
                const bool predicted_case = (risk == CellRisk::high);
                const bool is_case = (ds.response[i] == 1.0);
                if (is_case)
                    (predicted_case ? tp : fn)++;
                else
                    (predicted_case ? fp : tn)++;
            }
            ev.fold_bas.push_back(balanced_accuracy(tp, fn, tn, fp));
        }
        double sum = 0.0;
        for (double ba : ev.fold_bas) sum += ba;
        ev.cv_ba = sum / static_cast<double>(cfg.folds);
        return ev;
    };

    const auto better = [](const Evaluation& a, const Evaluation& b) {
        if (a.cv_ba != b.cv_ba) return a.cv_ba > b.cv_ba;
        return a.loci < b.loci;
    };

    // Subsets are chunked by their smallest element; workers pull the next
    // leading candidate and enumerate the (k-1)-subsets of what follows.
    int worker_count = workers;
    if (worker_count <= 0) worker_count = static_cast<int>(std::thread::hardware_concurrency());
    if (worker_count < 1) worker_count = 1;

    std::atomic<std::size_t> next_first{0};
    std::vector<std::optional<Evaluation>> best_per_worker(static_cast<std::size_t>(worker_count));
    std::vector<std::size_t> counted(static_cast<std::size_t>(worker_count), 0);
    std::exception_ptr first_error;
    std::mutex error_mutex;

    const auto worker_body = [&](int w) {
        try {
            std::optional<Evaluation>& best = best_per_worker[static_cast<std::size_t>(w)];
            std::vector<std::uint32_t> loci(cfg.k);
            for (;;) {
                const std::size_t first = next_first.fetch_add(1, std::memory_order_relaxed);
                if (first + cfg.k > candidates.size()) break;
                loci[0] = candidates[first];
                // positions into `candidates` for slots 1..k-1
                std::vector<std::size_t> pos(cfg.k);
                for (std::size_t t = 1; t < cfg.k; ++t) pos[t] = first + t;
                for (;;) {
                    for (std::size_t t = 1; t < cfg.k; ++t) loci[t] = candidates[pos[t]];
                    Evaluation ev = evaluate_subset(loci);
                    ++counted[static_cast<std::size_t>(w)];
                    if (!best || better(ev, *best)) best = std::move(ev);
                    if (cfg.k == 1) break;
                    std::size_t t = cfg.k;
                    bool done = false;
                    while (--t >= 1) {
                        if (++pos[t] <= candidates.size() - (cfg.k - t)) {
                            for (std::size_t u = t + 1; u < cfg.k; ++u) pos[u] = pos[u - 1] + 1;
                            break;
                        }
                        if (t == 1) done = true;
                    }
                    if (done) break;
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };

    if (worker_count == 1) {
        worker_body(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(worker_count));
        for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker_body, w);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::optional<Evaluation> best;
    std::size_t total_evaluated = 0;
    for (int w = 0; w < worker_count; ++w) {
        total_evaluated += counted[static_cast<std::size_t>(w)];
        auto& candidate = best_per_worker[static_cast<std::size_t>(w)];
        if (candidate && (!best || better(*candidate, *best))) best = std::move(candidate);
    }
    if (!best) throw config_error("mdr: no subset evaluated");

    MdrModel model;
    model.loci = best->loci;
    for (std::uint32_t j : model.loci) model.locus_names.push_back(ds.column_names[j]);
    model.fold_balanced_accuracies = best->fold_bas;
    model.cv_balanced_accuracy = best->cv_ba;
    model.threshold_mode = cfg.threshold_mode;
    model.subsets_evaluated = total_evaluated;
    model.cells = fit_mdr_cells(ds, model.loci, cfg.threshold_mode, &model.threshold);
    return model;
}

} // namespace jcis
