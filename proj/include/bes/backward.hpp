#pragma once

// Backward search: recursive sub-goal scoring with short-circuiting, the
// complementary pair score, and periodic goal-tree decomposition.
//
// Scoring recursion (root-down):
//   V_g == 1          -> 1, children not evaluated
//   leaf              -> V_g
//   otherwise         -> alpha*V_g + (1-alpha)*mean(children)
// The pair score is the same recursion with every V_g replaced by
// max{V_g(a), V_g(b)}.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "bes/core.hpp"
#include "bes/log.hpp"
#include "bes/rng.hpp"

namespace bes::backward {

struct VerifierStats {
    std::uint64_t calls = 0;
    std::uint64_t failures = 0;
};

/// Evaluates a goal's verifier: clamped to [0,1], throwing verifiers score 0.
inline double eval_verifier(const Goal& g, const Trajectory& n, VerifierStats* stats) {
    if (stats) stats->calls += 1;
    try {
        return std::clamp(g.verifier(n), 0.0, 1.0);
    } catch (const std::exception& e) {
        if (stats) stats->failures += 1;
        log::warn("verifier '%s' failed: %s", g.description.c_str(), e.what());
        return 0.0;
    }
}

namespace detail {

// Shared recursion body. `value` yields the (possibly pair-maxed) verifier
// value for a goal; ordered_children gates a child behind perfect scores of
// its earlier siblings, without evaluating gated children.
template <typename ValueFn>
double score_rec(const GoalTreeState& tree, GoalId gid, double alpha, const ValueFn& value) {
    const Goal& g = tree.at(gid);
    const double v = value(g);
    if (v == 1.0) return 1.0;
    if (g.is_leaf()) return v;
    double sum = 0.0;
    bool gate_open = true;
    for (GoalId c : g.children) {
        double cs = 0.0;
        if (!g.ordered_children || gate_open) {
            cs = score_rec(tree, c, alpha, value);
            if (g.ordered_children && cs != 1.0) gate_open = false;
        }
        sum += cs;
    }
    return alpha * v + (1.0 - alpha) * (sum / static_cast<double>(g.children.size()));
}

} // namespace detail

/// Recursive sub-goal score of one trajectory (uncached).
inline double backward_score(const Trajectory& n, GoalId g, const GoalTreeState& tree,
                             double alpha, VerifierStats* stats = nullptr) {
    return detail::score_rec(tree, g, alpha,
                             [&](const Goal& goal) { return eval_verifier(goal, n, stats); });
}

inline double backward_score(const Trajectory& n, const GoalTreeState& tree, double alpha,
                             VerifierStats* stats = nullptr) {
    return backward_score(n, tree.root_id, tree, alpha, stats);
}

/// Joint coverage score of two trajectories (uncached).
inline double pair_score(const Trajectory& a, const Trajectory& b, GoalId g,
                         const GoalTreeState& tree, double alpha,
                         VerifierStats* stats = nullptr) {
    return detail::score_rec(tree, g, alpha, [&](const Goal& goal) {
        return std::max(eval_verifier(goal, a, stats), eval_verifier(goal, b, stats));
    });
}

inline double pair_score(const Trajectory& a, const Trajectory& b, const GoalTreeState& tree,
                         double alpha, VerifierStats* stats = nullptr) {
    return pair_score(a, b, tree.root_id, tree, alpha, stats);
}

// ---------------------------------------------------------------------------
// Cached scorer

/// Memoizes verifier values per (entry id, goal id) under one tree version.
/// Verifiers are pure, trajectories immutable, and the cache is dropped on
/// every version bump, so caching is semantics-preserving. Required to make
/// the O(|C|^2) pair-score pass affordable.
class BackwardScorer {
  public:
    explicit BackwardScorer(double alpha) : alpha_(alpha) {}

    /// Drops the cache when the tree version moved.
    void sync_version(const GoalTreeState& tree) {
        if (tree.version != version_) {
            version_ = tree.version;
            cache_.clear();
        }
    }

    double verifier_value(const GoalTreeState& tree, GoalId gid, EntryId eid,
                          const Trajectory& n) {
        sync_version(tree);
        const std::uint64_t key = (eid << 20) | gid;
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        const double v = eval_verifier(tree.at(gid), n, &stats_);
        cache_.emplace(key, v);
        return v;
    }

    double score(const GoalTreeState& tree, EntryId eid, const Trajectory& n) {
        return detail::score_rec(tree, tree.root_id, alpha_, [&](const Goal& g) {
            return verifier_value(tree, g.id, eid, n);
        });
    }

    double pair_score(const GoalTreeState& tree, EntryId ea, const Trajectory& a, EntryId eb,
                      const Trajectory& b) {
        return detail::score_rec(tree, tree.root_id, alpha_, [&](const Goal& g) {
            return std::max(verifier_value(tree, g.id, ea, a), verifier_value(tree, g.id, eb, b));
        });
    }

    const VerifierStats& stats() const { return stats_; }
    double alpha() const { return alpha_; }

  private:
    double alpha_;
    std::uint64_t version_ = UINT64_MAX;
    std::unordered_map<std::uint64_t, double> cache_;
    VerifierStats stats_;
};

// ---------------------------------------------------------------------------
// Decomposition

/// Supplies 2-4 child goals for a leaf. An empty result marks the leaf
/// atomic (undecomposable); a thrown exception is a decomposer failure and
/// leaves the tree unchanged.
using DecomposerFn = std::function<std::vector<GoalSpec>(const Goal& leaf, RngStream&)>;

enum class DecomposeResult : std::uint8_t {
    no_unsolved_leaves,  ///< every leaf is satisfied by some pool entry
    no_decomposable_leaf,///< unsolved leaves exist but all are atomic or depth-capped
    atomic_leaf,         ///< the sampled leaf turned out atomic; marked undecomposable
    failure,             ///< decomposer threw; tree unchanged
    decomposed
};

struct DecomposeOutcome {
    DecomposeResult result = DecomposeResult::no_unsolved_leaves;
    GoalId leaf = 0;
    std::size_t children_added = 0;
};

/// One refinement step: sample an unsolved leaf uniformly and attach the
/// decomposer's children. `verifier_value(goal, entry)` supplies (possibly
/// cached) verifier values for the unsolved-leaf test.
inline DecomposeOutcome
decompose_step(GoalTreeState& tree, std::span<const PoolEntry> pool,
               const DecomposerFn& decomposer,
               const std::function<double(const Goal&, const PoolEntry&)>& verifier_value,
               std::uint32_t max_depth, RngStream& rng) {
    std::vector<GoalId> unsolved;
    for (const Goal& g : tree.goals) {
        if (!g.is_leaf()) continue;
        double best = 0.0;
        for (const PoolEntry& e : pool) {
            best = std::max(best, verifier_value(g, e));
            if (best == 1.0) break;
        }
        if (best < 1.0) unsolved.push_back(g.id);
    }
    if (unsolved.empty()) return {DecomposeResult::no_unsolved_leaves, 0, 0};

    std::vector<GoalId> candidates;
    for (GoalId gid : unsolved) {
        const Goal& g = tree.at(gid);
        if (g.decomposable && g.depth < max_depth) candidates.push_back(gid);
    }
    if (candidates.empty()) {
        log::info("decompose: %zu unsolved leaves, none decomposable (atomic or depth-capped)",
                  unsolved.size());
        return {DecomposeResult::no_decomposable_leaf, 0, 0};
    }

    const GoalId leaf = candidates[rng.uniform_index(candidates.size())];
    std::vector<GoalSpec> specs;
    try {
        specs = decomposer(tree.at(leaf), rng);
    } catch (const std::exception& e) {
        log::warn("decomposer failed on goal %u ('%s'): %s", leaf,
                  tree.at(leaf).description.c_str(), e.what());
        return {DecomposeResult::failure, leaf, 0};
    }
    if (specs.empty()) {
        tree.at(leaf).decomposable = false;
        return {DecomposeResult::atomic_leaf, leaf, 0};
    }
    const auto ids = tree.attach_children(leaf, std::move(specs));
    return {DecomposeResult::decomposed, leaf, ids.size()};
}

/// Convenience overload evaluating verifiers directly (no cache).
inline DecomposeOutcome decompose_step(GoalTreeState& tree, std::span<const PoolEntry> pool,
                                       const DecomposerFn& decomposer, std::uint32_t max_depth,
                                       RngStream& rng) {
    return decompose_step(
        tree, pool, decomposer,
        [](const Goal& g, const PoolEntry& e) { return eval_verifier(g, e.trajectory, nullptr); },
        max_depth, rng);
}

} // namespace bes::backward
