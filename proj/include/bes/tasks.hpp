#pragma once

// Built-in deterministic tasks plus the exhaustive-search oracle used by the
// acceptance tests.

#include <memory>

#include "bes/backward.hpp"
#include "bes/tasks/arithmetic.hpp"
#include "bes/tasks/base.hpp"
#include "bes/tasks/bernoulli.hpp"
#include "bes/tasks/circle_packing.hpp"
#include "bes/tasks/markov.hpp"

namespace bes::tasks {

struct BruteForceResult {
    Trajectory best;
    double score = 0.0;
    std::uint64_t nodes_visited = 0;
};

namespace detail {

struct BruteForceState {
    const TaskBundle* task = nullptr;
    const Goal* root_goal = nullptr;
    std::size_t max_len = 0;
    std::uint64_t node_cap = 0;
    std::uint64_t nodes = 0;
    BruteForceResult out;

    void visit(Trajectory& t) {
        if (++nodes > node_cap)
            throw SpaceTooLarge("brute force enumeration exceeded " + std::to_string(node_cap) +
                                " nodes");
        if (task->is_terminal(t)) {
            t.terminal = true;
            const double v = backward::eval_verifier(*root_goal, t, nullptr);
            if (!out.best.terminal || v > out.score) {
                out.best = t;
                out.score = v;
            }
            t.terminal = false;
            return;
        }
        if (t.size() >= max_len) return;
        const auto steps = task->enumerate_steps(t);
        if (!steps)
            throw SpaceTooLarge("task '" + task->name() + "' has no enumerable step space");
        for (const Step& s : *steps) {
            t.steps.push_back(s);
            visit(t);
            t.steps.pop_back();
        }
    }
};

} // namespace detail

/// Exhaustively enumerates all trajectories up to `max_len` steps and returns
/// the verifier-maximal terminal one. Throws SpaceTooLarge when the task is
/// not enumerable or the node cap is exceeded.
inline BruteForceResult brute_force_best(const TaskBundle& task, std::size_t max_len,
                                         std::uint64_t node_cap = 1'000'000) {
    detail::BruteForceState st;
    st.task = &task;
    const GoalTreeState tree = task.initial_tree();
    st.root_goal = &tree.root();
    st.max_len = max_len;
    st.node_cap = node_cap;
    Trajectory t;
    st.visit(t);
    st.out.nodes_visited = st.nodes;
    if (!st.out.best.terminal)
        st.out.score = 0.0; // no terminal trajectory within max_len
    return st.out;
}

/// Constructs a task from its serialized spec (trace headers, config files).
inline std::unique_ptr<TaskBundle> make_task(const nlohmann::json& spec) {
    const std::string name = spec.at("name").get<std::string>();
    if (name == "arithmetic") {
        return std::make_unique<ArithmeticTask>(spec.at("expression").get<std::string>(),
                                                spec.value("q", 0.6));
    }
    if (name == "bernoulli") {
        return std::make_unique<BernoulliSubgoalTask>(spec.at("m").get<std::size_t>(),
                                                      spec.at("p").get<std::vector<double>>());
    }
    if (name == "markov") {
        return std::make_unique<MarkovPolicyTask>(
            spec.at("alphabet").get<std::size_t>(), spec.at("horizon").get<std::size_t>(),
            spec.at("transitions").get<std::vector<std::vector<double>>>(),
            spec.value("init", std::vector<double>{}));
    }
    if (name == "circle_packing") {
        CirclePackingConfig cfg;
        cfg.n_circles = spec.value("n_circles", cfg.n_circles);
        cfg.reference_sum = spec.value("reference_sum", cfg.reference_sum);
        cfg.radius_threshold = spec.value("radius_threshold", cfg.radius_threshold);
        cfg.radius_count = spec.value("radius_count", cfg.radius_count);
        cfg.tangent_target = spec.value("tangent_target", cfg.tangent_target);
        cfg.boundary_target = spec.value("boundary_target", cfg.boundary_target);
        cfg.contact_tol = spec.value("contact_tol", cfg.contact_tol);
        return std::make_unique<CirclePackingTask>(cfg);
    }
    throw std::invalid_argument("unknown task: " + name);
}

} // namespace bes::tasks
