#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "jcis/dataset.hpp"
#include "jcis/errors.hpp"
#include "jcis/rng.hpp"
#include "jcis/screening.hpp"

namespace jcis {

enum class Scenario : int { sim1 = 1, sim2 = 2, sim3 = 3, sim4 = 4 };

/// Smallest p admitted by each design (set by the highest column its
/// response formula touches).
constexpr std::size_t scenario_min_p(Scenario s) noexcept {
    switch (s) {
        case Scenario::sim1: return 2;
        case Scenario::sim2: return 8;
        case Scenario::sim3: return 4;
        case Scenario::sim4: return 10;
    }
    return 2;
}

/// Causative pairs of each design, 0-based and canonically oriented. Fixed
/// by the scenario alone; seeds never change them.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> true_pairs(Scenario s) {
    switch (s) {
        case Scenario::sim1: return {{0, 1}};
        case Scenario::sim2: return {{0, 1}, {2, 3}, {4, 5}, {6, 7}};
        case Scenario::sim3: return {{0, 1}, {2, 3}};
        case Scenario::sim4: return {{0, 2}, {5, 9}};
    }
    return {};
}

struct ScenarioConfig {
    Scenario scenario = Scenario::sim1;
    std::size_t n = 200;
    std::size_t p = 1000;
    std::size_t reps = 100;
    std::uint64_t seed = 1;
    std::size_t top_window = 5;

    void validate() const {
        if (n < 10) throw config_error("scenario: need n >= 10, have " + std::to_string(n));
        const std::size_t min_p = scenario_min_p(scenario);
        if (p < min_p)
            throw config_error("scenario " + std::to_string(static_cast<int>(scenario)) +
                               ": need p >= " + std::to_string(min_p) + ", have " + std::to_string(p));
        if (reps < 1) throw config_error("scenario: need at least 1 replicate");
        if (top_window < 1) throw config_error("scenario: top window must be at least 1");
    }
};

namespace detail {

constexpr std::uint64_t kResponseTag = ~0ULL;

inline SplitRng column_rng(std::uint64_t seed, Scenario s, std::size_t replicate,
                           std::uint64_t column_tag) {
    return SplitRng(derive_seed(seed, static_cast<std::uint64_t>(static_cast<int>(s)),
                                static_cast<std::uint64_t>(replicate), column_tag));
}

inline Dataset blank_dataset(std::size_t n, std::size_t p, ResponseKind kind) {
    Dataset ds;
    ds.n = n;
    ds.p = p;
    ds.values.assign(n * p, 0.0);
    ds.response.assign(n, 0.0);
    ds.response_kind = kind;
    ds.column_names.reserve(p);
    for (std::size_t j = 0; j < p; ++j) ds.column_names.push_back("X" + std::to_string(j + 1));
    return ds;
}

} // namespace detail

/// Binary design: every covariate iid uniform on {0,1}, response the product
/// of the first two. No main effects at all; the only signal is the
/// interaction itself.
inline Dataset generate_sim1(std::size_t n, std::size_t p, std::uint64_t seed,
                             std::size_t replicate = 0) {
    Dataset ds = detail::blank_dataset(n, p, ResponseKind::binary);
    for (std::size_t j = 0; j < p; ++j) {
        SplitRng rng = detail::column_rng(seed, Scenario::sim1, replicate, j);
        auto col = ds.column_mut(j);
        for (std::size_t i = 0; i < n; ++i) col[i] = rng.bernoulli(0.5);
    }
    for (std::size_t i = 0; i < n; ++i) ds.response[i] = ds.column(0)[i] * ds.column(1)[i];
    return ds;
}

/// Binary response drawn first (P(Y=1) = 0.75); four causal column pairs.
/// Odd columns X1,X3,X5,X7 depend on Y through the theta table; each even
/// partner depends on (Y, preceding odd column); everything past X8 is
/// response-independent noise.
inline Dataset generate_sim2(std::size_t n, std::size_t p, std::uint64_t seed,
                             std::size_t replicate = 0) {
    if (p < 8) throw config_error("generate_sim2: need p >= 8, have " + std::to_string(p));
    Dataset ds = detail::blank_dataset(n, p, ResponseKind::binary);

    // theta[k][m]: P(X_odd = 1 | Y = k) for the m-th causal pair, odd
    // columns X1, X3, X5, X7 in order.
    constexpr double theta[2][4] = {{0.3, 0.4, 0.5, 0.3}, {0.95, 0.9, 0.9, 0.95}};

    SplitRng y_rng = detail::column_rng(seed, Scenario::sim2, replicate, detail::kResponseTag);
    for (std::size_t i = 0; i < n; ++i) ds.response[i] = y_rng.bernoulli(0.75);

    for (std::size_t m = 0; m < 4; ++m) {
        const std::size_t odd = 2 * m;      // 0-based column of X_{2m-1}
        const std::size_t even = 2 * m + 1; // 0-based column of X_{2m}
        SplitRng odd_rng = detail::column_rng(seed, Scenario::sim2, replicate, odd);
        SplitRng even_rng = detail::column_rng(seed, Scenario::sim2, replicate, even);
        auto odd_col = ds.column_mut(odd);
        auto even_col = ds.column_mut(even);
        for (std::size_t i = 0; i < n; ++i) {
            const int k = ds.response[i] > 0.5 ? 1 : 0;
            const double th = theta[k][m];
            odd_col[i] = odd_rng.bernoulli(th);
            const bool strong = th > 0.5;
            const double p_one = (odd_col[i] > 0.5) ? (strong ? 0.95 : 0.05)
                                                    : (strong ? 0.6 : 0.4);
            even_col[i] = even_rng.bernoulli(p_one);
        }
    }

    for (std::size_t j = 8; j < p; ++j) {
        SplitRng rng = detail::column_rng(seed, Scenario::sim2, replicate, j);
        auto col = ds.column_mut(j);
        for (std::size_t i = 0; i < n; ++i) col[i] = rng.bernoulli(0.5);
    }
    return ds;
}

/// Continuous design: covariates iid N(0, sd 2), response the sum of two
/// disjoint products. Again no main effects.
inline Dataset generate_sim3(std::size_t n, std::size_t p, std::uint64_t seed,
                             std::size_t replicate = 0) {
    Dataset ds = detail::blank_dataset(n, p, ResponseKind::continuous);
    for (std::size_t j = 0; j < p; ++j) {
        SplitRng rng = detail::column_rng(seed, Scenario::sim3, replicate, j);
        auto col = ds.column_mut(j);
        for (std::size_t i = 0; i < n; ++i) col[i] = 2.0 * rng.normal();
    }
    for (std::size_t i = 0; i < n; ++i)
        ds.response[i] = ds.column(0)[i] * ds.column(1)[i] + ds.column(2)[i] * ds.column(3)[i];
    return ds;
}

/// Dense lower Cholesky factor of the correlation matrix cov[j][k] =
/// rho^|j-k| (unit diagonal), row-major. The matrix is positive definite
/// for |rho| < 1, so a failed pivot means a real bug, not bad data.
inline std::vector<double> ar_correlation_cholesky(std::size_t p, double rho) {
    std::vector<double> pow_table(p);
    pow_table[0] = 1.0;
    for (std::size_t d = 1; d < p; ++d) pow_table[d] = pow_table[d - 1] * rho;

    std::vector<double> chol(p * p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k <= j; ++k) {
            long double acc = pow_table[j - k];
            for (std::size_t m = 0; m < k; ++m)
                acc -= static_cast<long double>(chol[j * p + m]) * chol[k * p + m];
            if (j == k) {
                if (acc <= 0.0L)
                    throw std::logic_error(
                        "internal: covariance factorization failed at pivot " + std::to_string(j));
                chol[j * p + j] = std::sqrt(static_cast<double>(acc));
            } else {
                chol[j * p + k] = static_cast<double>(acc) / chol[k * p + k];
            }
        }
    }
    return chol;
}

/// Multivariate-normal design with cov(X_j1, X_j2) = 0.1^|j1-j2| and a
/// response mixing four main effects with two strong interactions:
///     Y = X1 + X3 + X6 + X10 + 3 X1 X3 + 3 X6 X10.
/// `chol` may carry a precomputed factor (from ar_correlation_cholesky with
/// rho = 0.1) so a replication run factorizes only once.
inline Dataset generate_sim4(std::size_t n, std::size_t p, std::uint64_t seed,
                             std::size_t replicate = 0, const std::vector<double>* chol = nullptr) {
    if (p < 10) throw config_error("generate_sim4: need p >= 10, have " + std::to_string(p));
    std::vector<double> local;
    if (chol == nullptr) {
        local = ar_correlation_cholesky(p, 0.1);
        chol = &local;
    }

    Dataset ds = detail::blank_dataset(n, p, ResponseKind::continuous);
    // Fill with iid standard normals Z, column by column, then transform in
    // place to X = Z L^T. Walking j downward lets column j be overwritten
    // after every higher column has consumed it.
    for (std::size_t j = 0; j < p; ++j) {
        SplitRng rng = detail::column_rng(seed, Scenario::sim4, replicate, j);
        auto col = ds.column_mut(j);
        for (std::size_t i = 0; i < n; ++i) col[i] = rng.normal();
    }
    std::vector<double> mixed(n);
    for (std::size_t j = p; j-- > 0;) {
        std::fill(mixed.begin(), mixed.end(), 0.0);
        for (std::size_t k = 0; k <= j; ++k) {
            const double weight = (*chol)[j * p + k];
            if (weight == 0.0) continue;
            const auto z = ds.column(k);
            for (std::size_t i = 0; i < n; ++i) mixed[i] += weight * z[i];
        }
        std::copy(mixed.begin(), mixed.end(), ds.column_mut(j).begin());
    }

    const auto x1 = ds.column(0), x3 = ds.column(2), x6 = ds.column(5), x10 = ds.column(9);
    for (std::size_t i = 0; i < n; ++i)
        ds.response[i] =
            x1[i] + x3[i] + x6[i] + x10[i] + 3.0 * x1[i] * x3[i] + 3.0 * x6[i] * x10[i];
    return ds;
}

inline Dataset generate_scenario(const ScenarioConfig& cfg, std::size_t replicate,
                                 const std::vector<double>* sim4_chol = nullptr) {
    switch (cfg.scenario) {
        case Scenario::sim1: return generate_sim1(cfg.n, cfg.p, cfg.seed, replicate);
        case Scenario::sim2: return generate_sim2(cfg.n, cfg.p, cfg.seed, replicate);
        case Scenario::sim3: return generate_sim3(cfg.n, cfg.p, cfg.seed, replicate);
        case Scenario::sim4: return generate_sim4(cfg.n, cfg.p, cfg.seed, replicate, sim4_chol);
    }
    throw config_error("unknown scenario");
}

struct PairRankStats {
    std::uint32_t j1 = 0;
    std::uint32_t j2 = 0;
    double mean_rank = 0.0;
    double median_rank = 0.0;
    double pct_top_window = 0.0;
};

struct SimulationReport {
    ScenarioConfig config;
    std::vector<PairRankStats> per_pair;
    double joint_pct_top_window = 0.0;
    /// ranks[r][t]: rank of true pair t in replicate r (1-based).
    std::vector<std::vector<std::size_t>> ranks;
};

/// Runs the configured number of replicates: generate, screen the full pair
/// ranking, record the rank of every true pair, aggregate. Replicate r is a
/// pure function of (seed, scenario, r), so replicates can run on any number
/// of workers and the report comes out bit-identical.
inline SimulationReport run_scenario(const ScenarioConfig& cfg, int workers = 1) {
    cfg.validate();
    const auto truth = true_pairs(cfg.scenario);

    std::vector<double> sim4_chol;
    if (cfg.scenario == Scenario::sim4) sim4_chol = ar_correlation_cholesky(cfg.p, 0.1);

    SimulationReport report;
    report.config = cfg;
    report.ranks.assign(cfg.reps, {});

    int worker_count = workers;
    if (worker_count <= 0) worker_count = static_cast<int>(std::thread::hardware_concurrency());
    if (worker_count < 1) worker_count = 1;
    worker_count = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(worker_count), cfg.reps));

    std::atomic<std::size_t> next_rep{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    const auto run_replicate = [&](std::size_t r) {
        const Dataset ds = generate_scenario(cfg, r, cfg.scenario == Scenario::sim4 ? &sim4_chol : nullptr);
        const ScreenResult screened = screen(ds, PairRestriction::all_pairs, std::nullopt, 1);
        std::vector<std::size_t> rep_ranks;
        rep_ranks.reserve(truth.size());
        for (const auto& [a, b] : truth) {
            const auto rank = rank_of_pair(screened, a, b);
            if (!rank)
                throw degenerate_error("replicate " + std::to_string(r) + ": true pair (X" +
                                       std::to_string(a + 1) + ", X" + std::to_string(b + 1) +
                                       ") was skipped (zero variance)");
            rep_ranks.push_back(*rank);
        }
        report.ranks[r] = std::move(rep_ranks);
    };

    const auto worker_body = [&]() {
        for (;;) {
            const std::size_t r = next_rep.fetch_add(1, std::memory_order_relaxed);
            if (r >= cfg.reps) break;
            try {
                run_replicate(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (worker_count == 1) {
        worker_body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(worker_count));
        for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker_body);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    for (std::size_t t = 0; t < truth.size(); ++t) {
        std::vector<std::size_t> rs(cfg.reps);
        long double sum = 0.0L;
        std::size_t hits = 0;
        for (std::size_t r = 0; r < cfg.reps; ++r) {
            rs[r] = report.ranks[r][t];
            sum += static_cast<long double>(rs[r]);
            if (rs[r] <= cfg.top_window) ++hits;
        }
        std::sort(rs.begin(), rs.end());
        const std::size_t mid = cfg.reps / 2;
        const double median = (cfg.reps % 2 == 1)
                                  ? static_cast<double>(rs[mid])
                                  : 0.5 * (static_cast<double>(rs[mid - 1]) + static_cast<double>(rs[mid]));
        report.per_pair.push_back({truth[t].first, truth[t].second,
                                   static_cast<double>(sum / cfg.reps), median,
                                   100.0 * static_cast<double>(hits) / static_cast<double>(cfg.reps)});
    }

    std::size_t joint_hits = 0;
    for (std::size_t r = 0; r < cfg.reps; ++r) {
        bool all_in = true;
        for (std::size_t t = 0; t < truth.size(); ++t)
            if (report.ranks[r][t] > cfg.top_window) all_in = false;
        if (all_in) ++joint_hits;
    }
    report.joint_pct_top_window =
        100.0 * static_cast<double>(joint_hits) / static_cast<double>(cfg.reps);
    return report;
}

} // namespace jcis
