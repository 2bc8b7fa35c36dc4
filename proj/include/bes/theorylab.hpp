#pragma once

// Desk-scale Monte Carlo checks of the search theory, backed by exact
// information-theoretic oracles on small order-1 Markov chains.
//
// All quantities are in nats.
//
// Shell experiment: expansion rollouts concentrate inside the
// entropy shell |S_T - H_T| <= eps*T, while k-block evolution candidates
// (blocks drawn from independent rollouts, the product law Q) have mean
// surprise >= H_T + TC. TC is computed exactly per configuration rather than
// assuming a linear rate.
//
// Sub-goal experiment: candidates until one satisfies all m
// sub-goals simultaneously vs the (1-delta)-quantile of candidates until
// every sub-goal is covered at least once.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bes/forward.hpp"
#include "bes/rng.hpp"
#include "bes/tasks/markov.hpp"

namespace bes::theory {

struct TooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double entropy_nats(std::span<const double> dist) {
    double h = 0.0;
    for (double p : dist)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

/// Position marginals mu[t] (0-based positions 0..T-1) by forward propagation.
inline std::vector<std::vector<double>> position_marginals(const tasks::MarkovPolicyTask& task,
                                                           std::size_t T) {
    const std::size_t A = task.alphabet();
    std::vector<std::vector<double>> mu(T);
    mu[0] = task.init();
    for (std::size_t t = 1; t < T; ++t) {
        mu[t].assign(A, 0.0);
        for (std::size_t s = 0; s < A; ++s)
            for (std::size_t v = 0; v < A; ++v) mu[t][v] += mu[t - 1][s] * task.transitions()[s][v];
    }
    return mu;
}

/// Exact trajectory entropy H_T = H(Y_1) + sum_t H(Y_t | Y_{t-1}).
inline double exact_trajectory_entropy(const tasks::MarkovPolicyTask& task, std::size_t T) {
    if (task.alphabet() > 16 || T > 64)
        throw TooLarge("exact_trajectory_entropy: caps are A <= 16, T <= 64");
    if (T == 0) return 0.0;
    const auto mu = position_marginals(task, T);
    double h = entropy_nats(task.init());
    std::vector<double> row_h(task.alphabet());
    for (std::size_t s = 0; s < task.alphabet(); ++s)
        row_h[s] = entropy_nats(task.transitions()[s]);
    for (std::size_t t = 1; t < T; ++t)
        for (std::size_t s = 0; s < task.alphabet(); ++s) h += mu[t - 1][s] * row_h[s];
    return h;
}

/// Exact block total correlation sum_j H(U_j) - H(U_1..U_k) for contiguous
/// blocks at `boundaries` (0 = s_0 < s_1 < ... < s_k = T, 1-based block ends).
/// Order-1 closed form: the sum over interior boundaries b of I(Y_b; Y_{b+1}).
inline double exact_block_total_correlation(const tasks::MarkovPolicyTask& task,
                                            const std::vector<std::size_t>& boundaries) {
    if (boundaries.size() < 3 || boundaries.front() != 0)
        throw std::invalid_argument("boundaries must be 0 = s_0 < ... < s_k = T with k >= 2");
    for (std::size_t i = 1; i < boundaries.size(); ++i)
        if (boundaries[i] <= boundaries[i - 1])
            throw std::invalid_argument("boundaries must be strictly increasing");
    const std::size_t T = boundaries.back();
    if (task.alphabet() > 16 || T > 64)
        throw TooLarge("exact_block_total_correlation: caps are A <= 16, T <= 64");
    const auto mu = position_marginals(task, T);
    const std::size_t A = task.alphabet();
    double tc = 0.0;
    for (std::size_t j = 1; j + 1 < boundaries.size(); ++j) {
        const std::size_t b = boundaries[j]; // boundary between positions b and b+1 (1-based)
        // I(Y_b; Y_{b+1}) = H(Y_{b+1}) - sum_s mu_b(s) H(P(.|s))
        double h_next = entropy_nats(mu[b]); // mu is 0-based: position b+1 is mu[b]
        double h_cond = 0.0;
        for (std::size_t s = 0; s < A; ++s)
            h_cond += mu[b - 1][s] * entropy_nats(task.transitions()[s]);
        tc += h_next - h_cond;
    }
    return tc;
}

inline std::vector<std::size_t> equal_blocks(std::size_t T, std::size_t k) {
    std::vector<std::size_t> b(k + 1);
    for (std::size_t j = 0; j <= k; ++j) b[j] = (T * j) / k;
    return b;
}

/// Average marginal symbol entropy (1/T) sum_t H(Y_t). This is the
/// "per-step entropy" the shell half-width scales with; the conditional
/// entropy rate H_T/T would put the default shell inside the gaps of the
/// discrete per-step surprise lattice on near-deterministic chains.
inline double mean_marginal_step_entropy(const tasks::MarkovPolicyTask& task, std::size_t T) {
    const auto mu = position_marginals(task, T);
    double h = 0.0;
    for (const auto& m : mu) h += entropy_nats(m);
    return h / static_cast<double>(T);
}

// ---------------------------------------------------------------------------
// Exhaustive oracles (tiny instances only; used to cross-check the closed
// forms above)

namespace exhaustive {

/// -sum P log P over all A^T trajectories.
inline double trajectory_entropy(const tasks::MarkovPolicyTask& task, std::size_t T) {
    const std::size_t A = task.alphabet();
    double total = std::pow(static_cast<double>(A), static_cast<double>(T));
    if (total > static_cast<double>(1 << 20)) throw TooLarge("exhaustive entropy: A^T > 2^20");
    std::vector<std::size_t> y(T, 0);
    double h = 0.0;
    for (;;) {
        double p = task.init()[y[0]];
        for (std::size_t t = 1; t < T; ++t) p *= task.transitions()[y[t - 1]][y[t]];
        if (p > 0.0) h -= p * std::log(p);
        std::size_t t = 0;
        while (t < T && ++y[t] == A) y[t++] = 0;
        if (t == T) break;
    }
    return h;
}

/// Block total correlation by explicit block-marginal accumulation.
inline double block_total_correlation(const tasks::MarkovPolicyTask& task,
                                      const std::vector<std::size_t>& boundaries) {
    const std::size_t T = boundaries.back();
    const std::size_t A = task.alphabet();
    if (std::pow(static_cast<double>(A), static_cast<double>(T)) > static_cast<double>(1 << 20))
        throw TooLarge("exhaustive TC: A^T > 2^20");

    const std::size_t k = boundaries.size() - 1;
    std::vector<std::map<std::vector<std::size_t>, double>> block_marginals(k);
    double joint_h = 0.0;
    std::vector<std::size_t> y(T, 0);
    for (;;) {
        double p = task.init()[y[0]];
        for (std::size_t t = 1; t < T; ++t) p *= task.transitions()[y[t - 1]][y[t]];
        if (p > 0.0) joint_h -= p * std::log(p);
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<std::size_t> block(y.begin() + boundaries[j], y.begin() + boundaries[j + 1]);
            block_marginals[j][block] += p;
        }
        std::size_t t = 0;
        while (t < T && ++y[t] == A) y[t++] = 0;
        if (t == T) break;
    }
    double sum_h = 0.0;
    for (const auto& m : block_marginals)
        for (const auto& [block, p] : m)
            if (p > 0.0) sum_h -= p * std::log(p);
    return sum_h - joint_h;
}

} // namespace exhaustive

// ---------------------------------------------------------------------------
// Shell experiment: entropy-shell confinement and escape

struct ShellExperimentConfig {
    std::size_t alphabet = 2;
    std::vector<std::vector<double>> transitions = {{0.9, 0.1}, {0.1, 0.9}};
    std::vector<double> init = {};          ///< empty: uniform
    double epsilon_factor = 0.05;           ///< eps = factor * (H_T / T)
    double epsilon_abs = 0.0;               ///< > 0 overrides the factor
    std::size_t k_blocks = 2;
    std::size_t n_samples = 100000;
    std::vector<std::size_t> horizons = {16, 32, 64};
    std::uint64_t seed = 0;
    bool measure_crossover = true; ///< supplementary: the engine operator, not the product law

    void validate() const {
        if (k_blocks < 2) throw std::invalid_argument("shell config: k_blocks must be >= 2");
        if (!(epsilon_factor > 0.0) && !(epsilon_abs > 0.0))
            throw std::invalid_argument("shell config: epsilon must be positive");
        if (n_samples == 0) throw std::invalid_argument("shell config: n_samples must be positive");
        if (horizons.empty()) throw std::invalid_argument("shell config: need at least one horizon");
        for (std::size_t T : horizons)
            if (T < k_blocks) throw std::invalid_argument("shell config: horizon smaller than k_blocks");
    }
};

struct ShellRow {
    std::size_t T = 0;
    double H_T = 0, TC = 0, epsilon = 0, L = 0;
    double escape_rate = 0, escape_rate_se = 0;          // expansion rollouts outside the shell
    double evolution_mean_surprise = 0, evolution_se = 0; // k-block product-law candidates
    double evolution_in_shell = 0, evolution_in_shell_se = 0;
    double eq7_bound = 0;       // 1 - (TC/T - eps)T / (LT - H_T - eps T)
    bool eq7_applicable = false; // requires eps < TC/T
    double crossover_mean_surprise = 0; // supplementary, engine operator on 2 rollouts
};

struct ShellReport {
    ShellExperimentConfig config;
    std::vector<ShellRow> rows;
};

namespace detail {

struct MeanAcc {
    double sum = 0, sumsq = 0;
    std::uint64_t n = 0;
    void add(double x) {
        sum += x;
        sumsq += x * x;
        n += 1;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double se() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, sumsq / static_cast<double>(n) - m * m);
        return std::sqrt(var / static_cast<double>(n));
    }
};

/// One chain rollout, accumulating the exact surprise -log P(Y).
inline double rollout_surprise(const tasks::MarkovPolicyTask& task, std::size_t T, RngStream& rng,
                               std::vector<std::size_t>* out_symbols = nullptr) {
    double s = 0.0;
    std::size_t prev = 0;
    for (std::size_t t = 0; t < T; ++t) {
        const auto& dist = t == 0 ? task.init() : task.transitions()[prev];
        const std::size_t sym = rng.categorical(dist);
        s -= std::log(dist[sym]);
        if (out_symbols) out_symbols->push_back(sym);
        prev = sym;
    }
    return s;
}

inline double symbols_surprise(const tasks::MarkovPolicyTask& task,
                               std::span<const std::size_t> y) {
    double s = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t)
        s -= std::log(t == 0 ? task.init()[y[t]] : task.transitions()[y[t - 1]][y[t]]);
    return s;
}

} // namespace detail

inline ShellReport shell_experiment(const ShellExperimentConfig& cfg) {
    cfg.validate();
    ShellReport rep;
    rep.config = cfg;
    for (std::size_t hz_index = 0; hz_index < cfg.horizons.size(); ++hz_index) {
        const std::size_t T = cfg.horizons[hz_index];
        tasks::MarkovPolicyTask task(cfg.alphabet, T, cfg.transitions, cfg.init);
        ShellRow row;
        row.T = T;
        row.H_T = exact_trajectory_entropy(task, T);
        const auto boundaries = equal_blocks(T, cfg.k_blocks);
        row.TC = exact_block_total_correlation(task, boundaries);
        row.epsilon = cfg.epsilon_abs > 0.0 ? cfg.epsilon_abs
                                            : cfg.epsilon_factor * mean_marginal_step_entropy(task, T);
        row.L = task.surprise_bound();

        const double band = row.epsilon * static_cast<double>(T);

        // (a) expansion rollouts: escape fraction
        std::uint64_t escapes = 0;
        for (std::size_t i = 0; i < cfg.n_samples; ++i) {
            RngStream rng = RngStream::derive(cfg.seed, (hz_index << 32) | (1ull << 60) | i);
            const double s = detail::rollout_surprise(task, T, rng);
            if (std::abs(s - row.H_T) > band) ++escapes;
        }
        row.escape_rate = static_cast<double>(escapes) / static_cast<double>(cfg.n_samples);
        row.escape_rate_se =
            std::sqrt(row.escape_rate * (1 - row.escape_rate) / static_cast<double>(cfg.n_samples));

        // (b) k-block evolution candidates: product law Q = tensor of block marginals,
        // realized by taking block j from an independent rollout
        detail::MeanAcc evo;
        std::uint64_t in_shell = 0;
        std::vector<std::size_t> stitched, donor;
        for (std::size_t i = 0; i < cfg.n_samples; ++i) {
            stitched.clear();
            stitched.resize(T);
            for (std::size_t j = 0; j + 1 < boundaries.size(); ++j) {
                RngStream rng = RngStream::derive(
                    cfg.seed, (hz_index << 32) | (2ull << 60) | (i * cfg.k_blocks + j));
                donor.clear();
                detail::rollout_surprise(task, T, rng, &donor);
                for (std::size_t t = boundaries[j]; t < boundaries[j + 1]; ++t)
                    stitched[t] = donor[t];
            }
            const double s = detail::symbols_surprise(task, stitched);
            evo.add(s);
            if (std::abs(s - row.H_T) <= band) ++in_shell;
        }
        row.evolution_mean_surprise = evo.mean();
        row.evolution_se = evo.se();
        row.evolution_in_shell = static_cast<double>(in_shell) / static_cast<double>(cfg.n_samples);
        row.evolution_in_shell_se = std::sqrt(row.evolution_in_shell * (1 - row.evolution_in_shell) /
                                              static_cast<double>(cfg.n_samples));

        const double gamma_hat = row.TC / static_cast<double>(T);
        row.eq7_applicable = row.epsilon < gamma_hat;
        if (row.eq7_applicable) {
            const double denom = row.L * T - row.H_T - band;
            row.eq7_bound = 1.0 - (gamma_hat - row.epsilon) * static_cast<double>(T) / denom;
        }

        // supplementary: the engine's crossover on two policy rollouts
        if (cfg.measure_crossover) {
            detail::MeanAcc cx;
            const std::size_t n = std::max<std::size_t>(1, cfg.n_samples / 10);
            for (std::size_t i = 0; i < n; ++i) {
                RngStream rng = RngStream::derive(cfg.seed, (hz_index << 32) | (3ull << 60) | i);
                Trajectory a = task.rollout(rng);
                Trajectory b = task.rollout(rng);
                if (auto crossed = forward::crossover(a, b, rng)) {
                    const Trajectory& c = std::get<0>(*crossed);
                    cx.add(-task.log_prob(c) * static_cast<double>(T) /
                           static_cast<double>(std::max<std::size_t>(1, c.size())));
                }
            }
            row.crossover_mean_surprise = cx.mean();
        }

        rep.rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Sub-goal experiment: terminal-only vs coverage sample counts

struct SubgoalExperimentConfig {
    std::size_t m = 4;
    double p = 0.5;          ///< common per-sub-goal success probability
    double delta = 0.1;      ///< failure tolerance for the coverage quantile
    std::size_t trials = 10000;
    std::uint64_t seed = 0;

    void validate() const {
        if (m < 1) throw std::invalid_argument("subgoal config: m must be >= 1");
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("subgoal config: p must be in (0,1)");
        if (!(delta > 0.0 && delta < 1.0))
            throw std::invalid_argument("subgoal config: delta must be in (0,1)");
        if (trials == 0) throw std::invalid_argument("subgoal config: trials must be positive");
    }
};

struct SubgoalReport {
    SubgoalExperimentConfig config;
    double n_term_hat = 0;  ///< mean candidates until one satisfies all m sub-goals at once
    double n_term_se = 0;
    double n_bidir_hat = 0; ///< (1-delta)-quantile of candidates until full coverage
    double ratio = 0;
    double union_bound = 0; ///< (1/p) * ln(m/delta)
};

inline SubgoalReport subgoal_experiment(const SubgoalExperimentConfig& cfg) {
    cfg.validate();
    SubgoalReport rep;
    rep.config = cfg;
    rep.union_bound = (1.0 / cfg.p) * std::log(static_cast<double>(cfg.m) / cfg.delta);

    detail::MeanAcc term;
    std::vector<std::uint64_t> cover_counts;
    cover_counts.reserve(cfg.trials);
    constexpr std::uint64_t kCap = 100'000'000;

    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        // terminal-only: candidates until one has all m bits set
        {
            RngStream rng = RngStream::derive(cfg.seed, (1ull << 60) | trial);
            std::uint64_t n = 0;
            for (;;) {
                ++n;
                bool all = true;
                for (std::size_t i = 0; i < cfg.m; ++i)
                    if (!rng.bernoulli(cfg.p)) all = false;
                if (all || n >= kCap) break;
            }
            term.add(static_cast<double>(n));
        }
        // coverage: candidates until every sub-goal has been satisfied once
        {
            RngStream rng = RngStream::derive(cfg.seed, (2ull << 60) | trial);
            std::vector<bool> covered(cfg.m, false);
            std::size_t remaining = cfg.m;
            std::uint64_t n = 0;
            while (remaining > 0 && n < kCap) {
                ++n;
                for (std::size_t i = 0; i < cfg.m; ++i)
                    if (!covered[i] && rng.bernoulli(cfg.p)) {
                        covered[i] = true;
                        --remaining;
                    }
            }
            cover_counts.push_back(n);
        }
    }
    rep.n_term_hat = term.mean();
    rep.n_term_se = term.se();
    std::sort(cover_counts.begin(), cover_counts.end());
    const std::size_t qi = static_cast<std::size_t>(
        std::ceil((1.0 - cfg.delta) * static_cast<double>(cfg.trials)));
    rep.n_bidir_hat = static_cast<double>(cover_counts[std::min(cfg.trials - 1, qi == 0 ? 0 : qi - 1)]);
    rep.ratio = rep.n_bidir_hat > 0 ? rep.n_term_hat / rep.n_bidir_hat : 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Report serialization (structured results + CSV tables)

inline nlohmann::ordered_json to_json(const ShellReport& rep) {
    nlohmann::ordered_json j;
    j["experiment"] = "shell";
    j["config"] = {{"alphabet", rep.config.alphabet},
                   {"transitions", rep.config.transitions},
                   {"init", rep.config.init},
                   {"epsilon_factor", rep.config.epsilon_factor},
                   {"epsilon_abs", rep.config.epsilon_abs},
                   {"k_blocks", rep.config.k_blocks},
                   {"n_samples", rep.config.n_samples},
                   {"horizons", rep.config.horizons},
                   {"seed", rep.config.seed}};
    j["rows"] = nlohmann::ordered_json::array();
    for (const ShellRow& r : rep.rows) {
        j["rows"].push_back({{"T", r.T},
                             {"H_T", r.H_T},
                             {"TC", r.TC},
                             {"epsilon", r.epsilon},
                             {"L", r.L},
                             {"escape_rate", r.escape_rate},
                             {"escape_rate_se", r.escape_rate_se},
                             {"evolution_mean_surprise", r.evolution_mean_surprise},
                             {"evolution_se", r.evolution_se},
                             {"evolution_in_shell", r.evolution_in_shell},
                             {"evolution_in_shell_se", r.evolution_in_shell_se},
                             {"eq7_bound", r.eq7_bound},
                             {"eq7_applicable", r.eq7_applicable},
                             {"crossover_mean_surprise", r.crossover_mean_surprise}});
    }
    return j;
}

inline std::string to_csv(const ShellReport& rep) {
    std::string out = "T,H_T,TC,epsilon,L,escape_rate,escape_rate_se,evolution_mean_surprise,"
                      "evolution_se,evolution_in_shell,eq7_bound,eq7_applicable,"
                      "crossover_mean_surprise\n";
    char buf[512];
    for (const ShellRow& r : rep.rows) {
        std::snprintf(buf, sizeof buf,
                      "%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d,%.12g\n",
                      r.T, r.H_T, r.TC, r.epsilon, r.L, r.escape_rate, r.escape_rate_se,
                      r.evolution_mean_surprise, r.evolution_se, r.evolution_in_shell, r.eq7_bound,
                      r.eq7_applicable ? 1 : 0, r.crossover_mean_surprise);
        out += buf;
    }
    return out;
}

inline nlohmann::ordered_json to_json(const SubgoalReport& rep) {
    return {{"experiment", "subgoals"},
            {"config",
             {{"m", rep.config.m},
              {"p", rep.config.p},
              {"delta", rep.config.delta},
              {"trials", rep.config.trials},
              {"seed", rep.config.seed}}},
            {"n_term_hat", rep.n_term_hat},
            {"n_term_se", rep.n_term_se},
            {"n_bidir_hat", rep.n_bidir_hat},
            {"ratio", rep.ratio},
            {"union_bound", rep.union_bound}};
}

inline std::string to_csv(const SubgoalReport& rep) {
    char buf[320];
    std::snprintf(buf, sizeof buf, "m,p,delta,trials,n_term_hat,n_term_se,n_bidir_hat,ratio,union_bound\n"
                                   "%zu,%.12g,%.12g,%zu,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  rep.config.m, rep.config.p, rep.config.delta, rep.config.trials, rep.n_term_hat,
                  rep.n_term_se, rep.n_bidir_hat, rep.ratio, rep.union_bound);
    return buf;
}

} // namespace bes::theory
