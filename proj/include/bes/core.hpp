#pragma once

// Domain types shared by the whole engine: trajectories, the candidate pool,
// the goal tree, and the run configuration.

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace bes {

/// One step of a trajectory. The payload is an opaque token sequence owned by
/// the task (an arithmetic sub-computation, a placement edit, a Markov
/// symbol); the engine only ever compares steps for equality.
struct Step {
    std::string payload;

    friend bool operator==(const Step&, const Step&) = default;
    friend auto operator<=>(const Step&, const Step&) = default;
};

/// An ordered step sequence, partial or complete. The empty trajectory is the
/// search root. `terminal` is set by the task's terminal predicate; terminal
/// trajectories are never expanded further.
struct Trajectory {
    std::vector<Step> steps;
    bool terminal = false;

    std::size_t size() const { return steps.size(); }
    bool empty() const { return steps.empty(); }

    friend bool operator==(const Trajectory& a, const Trajectory& b) {
        return a.steps == b.steps;
    }
};

/// Length of the longest shared leading step run of two trajectories.
inline std::size_t common_prefix_len(const Trajectory& a, const Trajectory& b) {
    const std::size_t n = std::min(a.size(), b.size());
    std::size_t l = 0;
    while (l < n && a.steps[l] == b.steps[l]) ++l;
    return l;
}

enum class OpKind : std::uint8_t { root, expand, combine, deletion, translocate, crossover };

inline const char* op_kind_name(OpKind k) {
    switch (k) {
        case OpKind::root: return "root";
        case OpKind::expand: return "expand";
        case OpKind::combine: return "combine";
        case OpKind::deletion: return "delete";
        case OpKind::translocate: return "translocate";
        case OpKind::crossover: return "crossover";
    }
    return "?";
}

inline std::optional<OpKind> op_kind_from_name(const std::string& s) {
    if (s == "root") return OpKind::root;
    if (s == "expand") return OpKind::expand;
    if (s == "combine") return OpKind::combine;
    if (s == "delete") return OpKind::deletion;
    if (s == "translocate") return OpKind::translocate;
    if (s == "crossover") return OpKind::crossover;
    return std::nullopt;
}

using EntryId = std::uint64_t;

/// A scored pool member. Entries are immutable once inserted except for
/// `score` (recomputed when the goal tree changes) and `degree` (bumped when
/// the entry parents a child).
struct PoolEntry {
    EntryId id = 0;
    Trajectory trajectory;
    double score = 0.0;
    std::uint64_t score_version = 0; ///< goal-tree version the score was computed under
    std::uint32_t degree = 0;        ///< number of children spawned from this entry
    std::vector<EntryId> parent_ids; ///< 0 (root), 1 (expand/delete) or 2 entries
    std::int64_t birth_step = 0;     ///< forward-step index at insertion
    OpKind operator_tag = OpKind::root;
    bool duplicate = false;          ///< same step sequence as an earlier entry
};

/// The candidate set P. Ids are dense and monotone (id == index), assigned by
/// insertion order, so runs replay deterministically. Entries are never
/// removed; memory is bounded by the search budget.
class CandidatePool {
  public:
    EntryId insert(Trajectory traj, double score, std::uint64_t score_version,
                   std::vector<EntryId> parents, std::int64_t birth_step, OpKind tag) {
        PoolEntry e;
        e.id = entries_.size();
        e.trajectory = std::move(traj);
        e.score = score;
        e.score_version = score_version;
        e.parent_ids = std::move(parents);
        e.birth_step = birth_step;
        e.operator_tag = tag;
        for (EntryId p : e.parent_ids) {
            if (p >= entries_.size()) throw std::out_of_range("pool: unknown parent id");
            entries_[p].degree += 1;
        }
        const std::size_t h = hash_steps(e.trajectory);
        auto [it, fresh] = seen_.try_emplace(h, e.id);
        if (!fresh && entries_[it->second].trajectory == e.trajectory) e.duplicate = true;
        entries_.push_back(std::move(e));
        return entries_.back().id;
    }

    PoolEntry& operator[](EntryId id) { return entries_.at(id); }
    const PoolEntry& operator[](EntryId id) const { return entries_.at(id); }

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    std::span<const PoolEntry> entries() const { return entries_; }
    std::span<PoolEntry> entries() { return entries_; }

    /// Full-rescan degree check (test hook for the bookkeeping invariant).
    bool degrees_consistent() const {
        std::vector<std::uint32_t> counted(entries_.size(), 0);
        for (const auto& e : entries_)
            for (EntryId p : e.parent_ids) counted[p] += 1;
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (counted[i] != entries_[i].degree) return false;
        return true;
    }

    static std::size_t hash_steps(const Trajectory& t) {
        std::size_t h = 1469598103934665603ULL;
        for (const auto& s : t.steps) {
            for (char c : s.payload) {
                h ^= static_cast<unsigned char>(c);
                h *= 1099511628211ULL;
            }
            h ^= 0xffULL;
            h *= 1099511628211ULL;
        }
        return h;
    }

  private:
    std::vector<PoolEntry> entries_;
    std::unordered_map<std::size_t, EntryId> seen_; // first entry per step-sequence hash
};

// ---------------------------------------------------------------------------
// Goal tree

using GoalId = std::uint32_t;

/// Local verifier: score in [0,1] for how well a trajectory addresses a goal.
/// Must be pure and deterministic; a throwing verifier scores 0.
using VerifierFn = std::function<double(const Trajectory&)>;

/// A sub-goal. The root goal's verifier is the problem's terminal verifier.
struct Goal {
    GoalId id = 0;
    std::string description;
    VerifierFn verifier;
    std::vector<GoalId> children;
    std::uint32_t depth = 0;
    bool decomposable = true;      ///< false once known atomic
    bool ordered_children = false; ///< sequential gating of children (off by default)
    std::string decompose_key;     ///< task-private handle used by the decomposer

    bool is_leaf() const { return children.empty(); }
};

/// What a decomposer returns for one new child goal.
struct GoalSpec {
    std::string description;
    VerifierFn verifier;
    bool decomposable = true;
    bool ordered_children = false;
    std::string decompose_key;
};

/// Rooted goal tree. Goals are stored densely (id == index); `version`
/// increments exactly when a leaf gains children.
struct GoalTreeState {
    std::vector<Goal> goals;
    GoalId root_id = 0;
    std::uint64_t version = 0;

    static GoalTreeState make_root(std::string description, VerifierFn verifier,
                                   std::string decompose_key = "") {
        GoalTreeState t;
        Goal root;
        root.id = 0;
        root.description = std::move(description);
        root.verifier = std::move(verifier);
        root.decompose_key = std::move(decompose_key);
        t.goals.push_back(std::move(root));
        return t;
    }

    const Goal& root() const { return goals[root_id]; }
    const Goal& at(GoalId id) const { return goals.at(id); }
    Goal& at(GoalId id) { return goals.at(id); }

    std::size_t leaf_count() const {
        std::size_t n = 0;
        for (const auto& g : goals) n += g.is_leaf() ? 1 : 0;
        return n;
    }

    /// Attach children to a leaf and bump the version. Returns the new ids.
    std::vector<GoalId> attach_children(GoalId leaf, std::vector<GoalSpec> specs) {
        Goal& parent = goals.at(leaf);
        if (!parent.is_leaf()) throw std::logic_error("attach_children: goal already decomposed");
        std::vector<GoalId> ids;
        ids.reserve(specs.size());
        for (auto& s : specs) {
            Goal g;
            g.id = static_cast<GoalId>(goals.size());
            g.description = std::move(s.description);
            g.verifier = std::move(s.verifier);
            g.depth = parent.depth + 1;
            g.decomposable = s.decomposable;
            g.ordered_children = s.ordered_children;
            g.decompose_key = std::move(s.decompose_key);
            ids.push_back(g.id);
            goals.push_back(std::move(g));
            goals[leaf].children.push_back(ids.back());
        }
        if (!ids.empty()) version += 1;
        return ids;
    }
};

// ---------------------------------------------------------------------------
// Configuration

enum class ScoringMode : std::uint8_t { recursive, bucket_interpolation };
enum class DecomposeTrigger : std::uint8_t { interval, stagnation };
enum class RunMode : std::uint8_t { inference, group_collect };

/// Per-operator mixture weights; must sum to 1.
struct OperatorProbs {
    double expand = 0.70;
    double combine = 0.10;
    double deletion = 0.05;
    double translocate = 0.075;
    double crossover = 0.075;

    double sum() const { return expand + combine + deletion + translocate + crossover; }
};

struct EngineConfig {
    std::uint64_t budget_B = 200;  ///< max policy step-calls
    std::uint32_t K_dec = 10;      ///< decomposition interval in forward steps (0 = never)
    std::uint32_t K_max = 3;       ///< max steps per expansion
    double lambda = 0.1;           ///< unexplored bonus for degree-0 entries
    double tau_0 = 2.0;
    double tau_end = 1.0;
    double alpha = 0.3;            ///< parent/child blend in the recursive score
    OperatorProbs operator_probs;
    std::uint32_t group_target = 8;       ///< unique terminals to stop at (group_collect mode)
    std::uint64_t rng_seed = 0;
    ScoringMode scoring_mode = ScoringMode::recursive;
    double bucket_precision = 1e-2;
    RunMode mode = RunMode::inference;
    DecomposeTrigger decompose_trigger = DecomposeTrigger::interval;
    std::uint32_t stagnation_S = 5;       ///< checks without improvement before decomposing
    double stagnation_delta = 1e-2;       ///< improvement margin
    bool allow_terminal_splice = true;    ///< terminal entries as two-parent-operator parents
    std::uint32_t max_tree_depth = 6;     ///< leaves at this depth refuse decomposition
    std::uint32_t max_rollout_len = 256;  ///< step cap for padding rollouts
    bool record_wall_time = false;        ///< wall_micros in trace events (breaks byte-identity)

    /// Throws std::invalid_argument naming the offending field.
    void validate() const {
        if (!(tau_end > 0.0)) throw std::invalid_argument("config.tau_end: must be > 0");
        if (!(tau_0 >= tau_end)) throw std::invalid_argument("config.tau_0: must be >= tau_end");
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("config.alpha: must be in [0,1]");
        if (std::abs(operator_probs.sum() - 1.0) > 1e-12)
            throw std::invalid_argument("config.operator_probs: must sum to 1");
        if (operator_probs.expand < 0 || operator_probs.combine < 0 || operator_probs.deletion < 0 ||
            operator_probs.translocate < 0 || operator_probs.crossover < 0)
            throw std::invalid_argument("config.operator_probs: must be non-negative");
        if (K_max < 1) throw std::invalid_argument("config.K_max: must be >= 1");
        if (!(lambda >= 0.0)) throw std::invalid_argument("config.lambda: must be >= 0");
        if (!(bucket_precision > 0.0)) throw std::invalid_argument("config.bucket_precision: must be > 0");
        if (group_target < 1) throw std::invalid_argument("config.group_target: must be >= 1");
        if (decompose_trigger == DecomposeTrigger::stagnation && stagnation_S < 1)
            throw std::invalid_argument("config.stagnation_S: must be >= 1");
    }
};

} // namespace bes
