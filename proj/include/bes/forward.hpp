#pragma once

// Forward search: the five trajectory operators and the two Boltzmann
// selection mechanisms.
//
// Two-parent operators share the same splice anatomy: s is the common-prefix
// length of the parents, sigma_a and sigma_b their remaining suffixes
// (m_a = |sigma_a|, m_b = |sigma_b|). All suffix positions below are
// 1-indexed within the suffix.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bes/core.hpp"
#include "bes/rng.hpp"

namespace bes::forward {

/// One sampled forward action: which operator, which parents, which indices
/// the rng produced. Kept for tracing and replay diagnostics.
struct OperatorChoice {
    OpKind kind = OpKind::expand;
    std::vector<EntryId> parents;        // 1 or 2 entries
    std::uint32_t k = 0;                 // expand: sampled step count
    std::size_t l = 0, r = 0, q = 0;     // delete / translocate draws
    std::size_t i = 0, j = 0;            // crossover draws
};

// ---------------------------------------------------------------------------
// Operators (deterministic cores + sampling wrappers)

/// Combination: shared prefix, then a's suffix, then b's suffix.
inline Trajectory combine(const Trajectory& a, const Trajectory& b) {
    const std::size_t s = common_prefix_len(a, b);
    Trajectory out;
    out.steps.reserve(s + (a.size() - s) + (b.size() - s));
    out.steps.assign(a.steps.begin(), a.steps.end());
    out.steps.insert(out.steps.end(), b.steps.begin() + s, b.steps.end());
    return out;
}

/// Deletion of step l (1-indexed, interior: 2 <= l <= t-1).
inline std::optional<Trajectory> delete_at(const Trajectory& n, std::size_t l) {
    const std::size_t t = n.size();
    if (t < 3 || l < 2 || l > t - 1) return std::nullopt;
    Trajectory out;
    out.steps.reserve(t - 1);
    out.steps.assign(n.steps.begin(), n.steps.begin() + (l - 1));
    out.steps.insert(out.steps.end(), n.steps.begin() + l, n.steps.end());
    return out;
}

/// Samples l ~ Uniform{2,...,t-1}. Returns nullopt (TooShort) for t < 3.
inline std::optional<std::pair<Trajectory, std::size_t>> delete_step(const Trajectory& n,
                                                                     RngStream& rng) {
    const std::size_t t = n.size();
    if (t < 3) return std::nullopt;
    const std::size_t l = 2 + rng.uniform_index(t - 2);
    auto out = delete_at(n, l);
    return std::make_pair(std::move(*out), l);
}

/// Translocation core: sigma_a position r replaced by (sigma_b)_q.
inline std::optional<Trajectory> translocate_at(const Trajectory& a, const Trajectory& b,
                                                std::size_t r, std::size_t q) {
    const std::size_t s = common_prefix_len(a, b);
    const std::size_t m_a = a.size() - s;
    const std::size_t m_b = b.size() - s;
    if (m_a < 1 || m_b < 1 || r < 1 || r > m_a || q < 1 || q > m_b) return std::nullopt;
    Trajectory out;
    out.steps.reserve(s + m_a);
    out.steps.assign(a.steps.begin(), a.steps.begin() + (s + r - 1));
    out.steps.push_back(b.steps[s + q - 1]);
    out.steps.insert(out.steps.end(), a.steps.begin() + (s + r), a.steps.end());
    return out;
}

/// Samples r ~ Uniform{1,...,m_a}, q ~ Uniform{1,...,m_b}. Returns nullopt
/// (EmptySuffix) when either suffix is empty.
inline std::optional<std::tuple<Trajectory, std::size_t, std::size_t>>
translocate(const Trajectory& a, const Trajectory& b, RngStream& rng) {
    const std::size_t s = common_prefix_len(a, b);
    const std::size_t m_a = a.size() - s;
    const std::size_t m_b = b.size() - s;
    if (m_a < 1 || m_b < 1) return std::nullopt;
    const std::size_t r = 1 + rng.uniform_index(m_a);
    const std::size_t q = 1 + rng.uniform_index(m_b);
    auto out = translocate_at(a, b, r, q);
    return std::make_tuple(std::move(*out), r, q);
}

/// Crossover core: prefix + sigma_a[1:i] + sigma_b[j+1:m_b].
inline std::optional<Trajectory> crossover_at(const Trajectory& a, const Trajectory& b,
                                              std::size_t i, std::size_t j) {
    const std::size_t s = common_prefix_len(a, b);
    const std::size_t m_a = a.size() - s;
    const std::size_t m_b = b.size() - s;
    if (m_b < 1 || i > m_a || j > m_b - 1) return std::nullopt;
    Trajectory out;
    out.steps.reserve(s + i + (m_b - j));
    out.steps.assign(a.steps.begin(), a.steps.begin() + (s + i));
    out.steps.insert(out.steps.end(), b.steps.begin() + (s + j), b.steps.end());
    return out;
}

/// Samples i ~ Uniform{0,...,m_a}, j ~ Uniform{0,...,m_b-1}. Returns nullopt
/// (EmptySuffix) when b has no suffix.
inline std::optional<std::tuple<Trajectory, std::size_t, std::size_t>>
crossover(const Trajectory& a, const Trajectory& b, RngStream& rng) {
    const std::size_t s = common_prefix_len(a, b);
    const std::size_t m_a = a.size() - s;
    const std::size_t m_b = b.size() - s;
    if (m_b < 1) return std::nullopt;
    const std::size_t i = rng.uniform_index(m_a + 1);
    const std::size_t j = rng.uniform_index(m_b);
    auto out = crossover_at(a, b, i, j);
    return std::make_tuple(std::move(*out), i, j);
}

/// Expansion result. `child` is empty when the policy failed; the calls made
/// up to and including the failure still count against the budget.
struct ExpandOutcome {
    std::optional<Trajectory> child;
    std::uint32_t k_sampled = 0;
    std::uint32_t policy_calls = 0;
};

/// Appends up to K ~ Uniform{1,...,k_max} policy steps to `parent`, stopping
/// early on a terminal step. `call_cap` bounds the draws by the remaining
/// budget. Policy must expose
///   std::optional<Step> next_step(const Trajectory&, RngStream&)
///   bool is_terminal(const Trajectory&) const
template <typename Policy>
ExpandOutcome expand(const Trajectory& parent, Policy& policy, std::uint32_t k_max,
                     std::uint64_t call_cap, RngStream& rng) {
    ExpandOutcome out;
    out.k_sampled = static_cast<std::uint32_t>(1 + rng.uniform_index(k_max));
    const std::uint64_t draws = std::min<std::uint64_t>(out.k_sampled, call_cap);
    Trajectory child = parent;
    for (std::uint64_t k = 0; k < draws; ++k) {
        std::optional<Step> step = policy.next_step(child, rng);
        out.policy_calls += 1;
        if (!step) return out; // policy failure: no-op, calls already spent
        child.steps.push_back(std::move(*step));
        if (policy.is_terminal(child)) {
            child.terminal = true;
            break;
        }
    }
    out.child = std::move(child);
    return out;
}

// ---------------------------------------------------------------------------
// Boltzmann selection

/// Softmax probabilities computed in max-shifted form.
inline std::vector<double> stable_softmax(std::span<const double> logits) {
    std::vector<double> p(logits.size(), 0.0);
    if (logits.empty()) return p;
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

/// Selection score with the unexplored bonus: s + lambda for degree-0
/// entries. A flagged duplicate repeats an already-present trajectory, so it
/// is not unexplored and draws no bonus.
inline double bonus_score(const PoolEntry& e, double lambda) {
    return e.score + (e.degree == 0 && !e.duplicate ? lambda : 0.0);
}

/// Draws one parent proportionally to exp(bonus_score/tau). Returns the index
/// into `eligible`, or nullopt when the set is empty.
inline std::optional<std::size_t> select_single_parent(std::span<const PoolEntry* const> eligible,
                                                       double tau, double lambda, RngStream& rng) {
    if (eligible.empty()) return std::nullopt;
    std::vector<double> logits(eligible.size());
    for (std::size_t i = 0; i < eligible.size(); ++i)
        logits[i] = bonus_score(*eligible[i], lambda) / tau;
    const std::vector<double> p = stable_softmax(logits);
    return rng.categorical(p);
}

using PairScoreFn = std::function<double(const PoolEntry&, const PoolEntry&)>;

/// Pair enumeration switches to subsampling above this candidate count.
inline constexpr std::size_t kExactPairEnumLimit = 512;

/// Draws an unordered parent pair proportionally to exp(pair_score/tau) over
/// all unordered pairs (subsampled above kExactPairEnumLimit candidates).
/// Returns indices into `eligible` with the lower pool id first, or nullopt
/// when fewer than two candidates exist.
inline std::optional<std::pair<std::size_t, std::size_t>>
select_parent_pair(std::span<const PoolEntry* const> eligible, const PairScoreFn& pair_score,
                   double tau, RngStream& rng) {
    const std::size_t n = eligible.size();
    if (n < 2) return std::nullopt;

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (n <= kExactPairEnumLimit) {
        pairs.reserve(n * (n - 1) / 2);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    } else {
        const std::size_t want = kExactPairEnumLimit * n;
        pairs.reserve(want);
        for (std::size_t k = 0; k < want; ++k) {
            std::size_t i = rng.uniform_index(n);
            std::size_t j = rng.uniform_index(n - 1);
            if (j >= i) ++j;
            pairs.emplace_back(std::min(i, j), std::max(i, j));
        }
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    }

    std::vector<double> logits(pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k)
        logits[k] = pair_score(*eligible[pairs[k].first], *eligible[pairs[k].second]) / tau;
    const std::vector<double> p = stable_softmax(logits);
    auto [i, j] = pairs[rng.categorical(p)];
    if (eligible[i]->id > eligible[j]->id) std::swap(i, j);
    return std::make_pair(i, j);
}

/// Linear annealing from tau_0 at step 0 to tau_end at step == total_steps.
inline double anneal_tau(std::uint64_t step, std::uint64_t total_steps, double tau_0,
                         double tau_end) {
    if (total_steps == 0) return tau_end;
    const double f = static_cast<double>(std::min(step, total_steps)) /
                     static_cast<double>(total_steps);
    return tau_0 + (tau_end - tau_0) * f;
}

/// Samples the operator kind from the configured mixture.
inline OpKind sample_operator_kind(const OperatorProbs& probs, RngStream& rng) {
    const double w[5] = {probs.expand, probs.combine, probs.deletion, probs.translocate,
                         probs.crossover};
    switch (rng.categorical(w)) {
        case 0: return OpKind::expand;
        case 1: return OpKind::combine;
        case 2: return OpKind::deletion;
        case 3: return OpKind::translocate;
        default: return OpKind::crossover;
    }
}

} // namespace bes::forward
