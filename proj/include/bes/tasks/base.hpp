#pragma once

// Task plug-in surface: a task bundles the stochastic step policy, the
// terminal predicate, the goal tree with its verifiers, and the deterministic
// decomposer for one problem instance. All methods are pure given (problem
// state, inputs, rng stream), so runs replay exactly.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bes/core.hpp"
#include "bes/rng.hpp"

namespace bes::tasks {

class TaskBundle {
  public:
    virtual ~TaskBundle() = default;

    virtual std::string name() const = 0;

    // --- policy interface -------------------------------------------------
    /// Next step given the growing prefix. Empty means the policy failed;
    /// the call still counts against the budget.
    virtual std::optional<Step> next_step(const Trajectory& prefix, RngStream& rng) const = 0;
    virtual bool is_terminal(const Trajectory& t) const = 0;

    // --- backward interface -----------------------------------------------
    /// Tree holding only the root goal; its verifier is the problem's
    /// terminal verifier.
    virtual GoalTreeState initial_tree() const = 0;
    /// 2-4 strict sub-goals for a leaf; empty marks the leaf atomic.
    virtual std::vector<GoalSpec> decompose(const Goal& leaf, RngStream& rng) const = 0;

    // --- optional hooks ----------------------------------------------------
    /// Raw objective for bucket-interpolation scoring (tasks with a native
    /// objective beyond the verifier, e.g. sum of radii).
    virtual std::optional<double> raw_objective(const Trajectory&) const { return std::nullopt; }

    /// Finite step alternatives at a prefix, for exhaustive oracles. Empty
    /// optional: the step space is not enumerable for this task.
    virtual std::optional<std::vector<Step>> enumerate_steps(const Trajectory&) const {
        return std::nullopt;
    }

    /// Parameters sufficient to reconstruct this task (trace header, replay).
    virtual nlohmann::ordered_json spec_json() const = 0;
};

/// Thrown when an exhaustive enumeration would exceed its node cap.
struct SpaceTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace bes::tasks
