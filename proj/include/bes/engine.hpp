#pragma once

// The main search loop: budget accounting, operator dispatch, scoring,
// decomposition scheduling and termination.
//
// Per forward step: anneal tau, sample an operator, select parents by
// Boltzmann weight, build the child, score it against the goal tree, insert.
// Degenerate operator draws resample the operator kind up to 3 times and then
// fall back to expansion. Every K_dec steps (or on the stagnation trigger)
// one unsolved leaf is decomposed and the whole pool is re-scored.
//
// The budget unit is policy step-calls: evolution operators and verification
// are budget-free; verifier calls are tallied separately for cost analysis.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "bes/backward.hpp"
#include "bes/core.hpp"
#include "bes/forward.hpp"
#include "bes/log.hpp"
#include "bes/rng.hpp"
#include "bes/tasks/base.hpp"

namespace bes {

enum class EventKind : std::uint8_t { forward, decompose, rescore, terminal, pad_rollout };

inline const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::forward: return "forward";
        case EventKind::decompose: return "decompose";
        case EventKind::rescore: return "rescore";
        case EventKind::terminal: return "terminal";
        case EventKind::pad_rollout: return "pad_rollout";
    }
    return "?";
}

inline std::optional<EventKind> event_kind_from_name(const std::string& s) {
    if (s == "forward") return EventKind::forward;
    if (s == "decompose") return EventKind::decompose;
    if (s == "rescore") return EventKind::rescore;
    if (s == "terminal") return EventKind::terminal;
    if (s == "pad_rollout") return EventKind::pad_rollout;
    return std::nullopt;
}

/// One line of the append-only run trace.
struct TraceEvent {
    std::int64_t step = 0;
    EventKind kind = EventKind::forward;
    OpKind operator_tag = OpKind::root;
    std::vector<EntryId> parent_ids;
    std::int64_t child_id = -1; ///< -1: no child (failed step, decompose, rescore)
    double child_score = 0.0;
    double tau = 0.0;
    std::uint64_t policy_calls_cumulative = 0;
    std::uint64_t tree_version = 0;
    std::uint64_t wall_micros = 0; ///< 0 unless wall-time recording is on

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// Bucket-interpolation effective score: the raw objective decides the bucket
/// and strictly dominates; the backward score ranks within the bucket and can
/// never push a candidate past the next bucket boundary.
inline double effective_score(double raw_objective, double backward, double precision) {
    const double q = raw_objective / precision;
    const double bucket = std::floor(q + 1e-9 * std::max(1.0, std::fabs(q)));
    constexpr double eps_guard = 1e-6;
    return bucket * precision + backward * precision * (1.0 - eps_guard);
}

struct RunResult {
    CandidatePool pool;
    GoalTreeState tree;
    std::uint64_t policy_calls = 0;
    std::uint64_t verifier_calls = 0;
    std::uint64_t verifier_failures = 0;
    std::int64_t forward_steps = 0;
    std::uint64_t stagnation_counter = 0;
    bool found_terminal = false;
    bool early_exit = false;
    std::optional<PoolEntry> best;    ///< best terminal; best-scored partial when none found
    double best_terminal_value = 0.0; ///< root-verifier value of `best` when terminal
    std::size_t unique_terminals = 0;
    std::vector<TraceEvent> events;
};

class Engine {
  public:
    Engine(const tasks::TaskBundle& task, EngineConfig cfg)
        : task_(task), cfg_(cfg), scorer_(cfg.alpha), rng_(RngStream::derive(cfg.rng_seed, 0)) {
        cfg_.validate();
        if (cfg_.scoring_mode == ScoringMode::bucket_interpolation &&
            !task_.raw_objective(Trajectory{}).has_value())
            throw std::invalid_argument(
                "config.scoring_mode: bucket_interpolation needs a task with a raw objective");
    }

    RunResult run() {
        const auto t_start = std::chrono::steady_clock::now();
        RunResult res;
        tree_ = task_.initial_tree();
        pool_ = CandidatePool{};
        policy_calls_ = 0;
        scorer_ = backward::BackwardScorer(cfg_.alpha);
        rng_ = RngStream::derive(cfg_.rng_seed, 0);
        RngStream decomposer_rng = RngStream::derive(cfg_.rng_seed, 1);

        // initial decomposition of the root goal
        if (cfg_.K_dec > 0 || cfg_.decompose_trigger == DecomposeTrigger::stagnation) {
            auto outcome = backward::decompose_step(
                tree_, pool_.entries(), decomposer_fn(), verifier_value_fn(), cfg_.max_tree_depth,
                decomposer_rng);
            emit(res, make_event(0, EventKind::decompose, OpKind::root, {}, -1, 0.0, cfg_.tau_0),
                 t_start);
            (void)outcome;
        }

        // Seed the pool with the empty root node.
        {
            Trajectory root;
            root.terminal = task_.is_terminal(root);
            const double s = entry_score(pool_.size(), root);
            pool_.insert(std::move(root), s, tree_.version, {}, 0, OpKind::root);
        }

        const std::uint64_t total_anneal_steps =
            std::max<std::uint64_t>(1, (2 * cfg_.budget_B) / (cfg_.K_max + 1));
        // safety valve: evolution steps are budget-free, so a mixture with a
        // near-zero expansion probability could loop at constant budget while
        // the pool (and the O(|pool|^2) pair pass) grows without bound
        const std::uint64_t step_cap = std::max<std::uint64_t>(64, 4 * total_anneal_steps);

        double stagnation_best = best_metric();
        std::uint64_t stagnation_counter = 0;
        std::int64_t t = 0;
        bool stop = false;

        while (!stop && policy_calls_ < cfg_.budget_B && static_cast<std::uint64_t>(t) < step_cap) {
            const double tau =
                forward::anneal_tau(static_cast<std::uint64_t>(t), total_anneal_steps, cfg_.tau_0,
                                    cfg_.tau_end);
            const StepOutcome out = forward_step(tau);
            std::int64_t child_id = -1;
            double child_score = 0.0;
            if (out.child) {
                child_id = static_cast<std::int64_t>(pool_.size());
                child_score = entry_score(pool_.size(), *out.child);
                pool_.insert(*out.child, child_score, tree_.version, out.choice.parents, t,
                             out.choice.kind);
            }
            emit(res,
                 make_event(t, EventKind::forward, out.choice.kind, out.choice.parents, child_id,
                            child_score, tau),
                 t_start);
            t += 1;

            // decomposition scheduling
            bool decompose_now = false;
            if (cfg_.decompose_trigger == DecomposeTrigger::interval) {
                decompose_now = cfg_.K_dec > 0 && t % cfg_.K_dec == 0;
            } else {
                const double metric = best_metric();
                if (metric > stagnation_best + cfg_.stagnation_delta) {
                    stagnation_best = metric;
                    stagnation_counter = 0;
                } else {
                    stagnation_counter += 1;
                }
                if (stagnation_counter >= cfg_.stagnation_S) {
                    decompose_now = true;
                    stagnation_counter = 0;
                }
            }
            if (decompose_now) {
                const std::uint64_t version_before = tree_.version;
                backward::decompose_step(tree_, pool_.entries(), decomposer_fn(),
                                         verifier_value_fn(), cfg_.max_tree_depth, decomposer_rng);
                emit(res, make_event(t - 1, EventKind::decompose, OpKind::root, {}, -1, 0.0, tau),
                     t_start);
                if (tree_.version != version_before) {
                    rescore_pool();
                    emit(res, make_event(t - 1, EventKind::rescore, OpKind::root, {}, -1, 0.0, tau),
                         t_start);
                }
            }
            res.stagnation_counter = stagnation_counter;

            // terminal bookkeeping for the new child
            if (out.child && out.child->terminal) {
                const EntryId id = static_cast<EntryId>(child_id);
                const double v = scorer_.verifier_value(tree_, tree_.root_id, id,
                                                        pool_[id].trajectory);
                update_best_terminal(res, id, v);
                if (cfg_.mode == RunMode::inference && v == 1.0) {
                    res.early_exit = true;
                    stop = true;
                } else if (cfg_.mode == RunMode::group_collect &&
                           unique_terminal_count() >= cfg_.group_target) {
                    res.early_exit = true;
                    stop = true;
                }
            }
        }
        if (static_cast<std::uint64_t>(t) >= step_cap && policy_calls_ < cfg_.budget_B)
            log::warn("run stopped at the forward-step cap (%llu) with budget remaining",
                      static_cast<unsigned long long>(step_cap));

        res.forward_steps = t;
        finalize_result(res, t, t_start);
        return res;
    }

  private:
    struct StepOutcome {
        std::optional<Trajectory> child;
        forward::OperatorChoice choice; ///< executed operator, parents, sampled indices
    };

    // --- scoring ------------------------------------------------------------

    double entry_score(EntryId prospective_id, const Trajectory& traj) {
        const double backward = scorer_.score(tree_, prospective_id, traj);
        if (cfg_.scoring_mode == ScoringMode::recursive) return backward;
        const double raw = task_.raw_objective(traj).value_or(0.0);
        return effective_score(raw, backward, cfg_.bucket_precision);
    }

    void rescore_pool() {
        for (PoolEntry& e : pool_.entries()) {
            e.score = entry_score(e.id, e.trajectory);
            e.score_version = tree_.version;
        }
    }

    /// Stagnation metric: the task's raw objective when it has one, otherwise
    /// the best pool score.
    double best_metric() const {
        double best = 0.0;
        for (const PoolEntry& e : pool_.entries()) {
            const auto raw = task_.raw_objective(e.trajectory);
            best = std::max(best, raw ? *raw : e.score);
        }
        return best;
    }

    // --- forward step -------------------------------------------------------

    StepOutcome forward_step(double tau) {
        // single-parent operators draw from non-terminal entries only;
        // terminal entries may additionally parent two-parent splices
        std::vector<const PoolEntry*> single, splice;
        for (const PoolEntry& e : pool_.entries()) {
            if (!e.trajectory.terminal) {
                single.push_back(&e);
                splice.push_back(&e);
            } else if (cfg_.allow_terminal_splice) {
                splice.push_back(&e);
            }
        }

        OpKind kind = forward::sample_operator_kind(cfg_.operator_probs, rng_);
        for (std::uint32_t attempts = 0;; ) {
            switch (kind) {
                case OpKind::expand: {
                    StepOutcome out;
                    out.choice.kind = OpKind::expand;
                    const auto pick = forward::select_single_parent(single, tau, cfg_.lambda, rng_);
                    if (!pick) return out; // EmptyEligibleSet: no-op forward step
                    const PoolEntry& parent = *single[*pick];
                    out.choice.parents = {parent.id};
                    auto ex = forward::expand(parent.trajectory, task_, cfg_.K_max,
                                              cfg_.budget_B - policy_calls_, rng_);
                    policy_calls_ += ex.policy_calls;
                    out.choice.k = ex.k_sampled;
                    if (ex.child) out.child = std::move(ex.child);
                    return out; // policy failure: no-op that kept its call cost
                }
                case OpKind::deletion: {
                    StepOutcome out;
                    out.choice.kind = OpKind::deletion;
                    const auto pick = forward::select_single_parent(single, tau, cfg_.lambda, rng_);
                    if (!pick) return out;
                    const PoolEntry& parent = *single[*pick];
                    if (auto del = forward::delete_step(parent.trajectory, rng_)) {
                        out.choice.parents = {parent.id};
                        out.choice.l = del->second;
                        out.child = finish_child(std::move(del->first));
                        return out;
                    }
                    break; // TooShort
                }
                case OpKind::combine:
                case OpKind::translocate:
                case OpKind::crossover: {
                    if (splice.size() < 2) break; // TooFewCandidates
                    const auto picked = forward::select_parent_pair(
                        splice,
                        [&](const PoolEntry& a, const PoolEntry& b) {
                            return scorer_.pair_score(tree_, a.id, a.trajectory, b.id,
                                                      b.trajectory);
                        },
                        tau, rng_);
                    const PoolEntry* first = splice[picked->first];
                    const PoolEntry* second = splice[picked->second];
                    // The pair is sampled unordered; role assignment is ours.
                    // A terminal parent contributes its steps from the head
                    // (combine/crossover) or donor (translocate) side, so the
                    // child keeps an extendable tail.
                    if (first->trajectory.terminal != second->trajectory.terminal) {
                        const bool first_terminal = first->trajectory.terminal;
                        const bool want_terminal_first = kind != OpKind::translocate;
                        if (first_terminal != want_terminal_first) std::swap(first, second);
                    } else if (kind == OpKind::combine && first->score > second->score) {
                        // combine appends b's suffix after a's, so on conflicting
                        // steps the b side wins; give that slot to the better parent
                        std::swap(first, second);
                    }
                    const PoolEntry& a = *first;
                    const PoolEntry& b = *second;
                    StepOutcome out;
                    out.choice.kind = kind;
                    std::optional<Trajectory> child;
                    if (kind == OpKind::combine) {
                        child = forward::combine(a.trajectory, b.trajectory);
                    } else if (kind == OpKind::translocate) {
                        if (auto tr = forward::translocate(a.trajectory, b.trajectory, rng_)) {
                            child = std::move(std::get<0>(*tr));
                            out.choice.r = std::get<1>(*tr);
                            out.choice.q = std::get<2>(*tr);
                        }
                    } else {
                        if (auto cr = forward::crossover(a.trajectory, b.trajectory, rng_)) {
                            child = std::move(std::get<0>(*cr));
                            out.choice.i = std::get<1>(*cr);
                            out.choice.j = std::get<2>(*cr);
                        }
                    }
                    if (child) {
                        out.choice.parents = {a.id, b.id};
                        out.child = finish_child(std::move(*child));
                        return out;
                    }
                    break; // EmptySuffix
                }
                case OpKind::root: break; // unreachable
            }
            attempts += 1;
            kind = attempts <= 3 ? forward::sample_operator_kind(cfg_.operator_probs, rng_)
                                 : OpKind::expand;
        }
    }

    Trajectory finish_child(Trajectory t) {
        t.terminal = task_.is_terminal(t);
        return t;
    }

    // --- bookkeeping ----------------------------------------------------------

    backward::DecomposerFn decomposer_fn() {
        return [this](const Goal& g, RngStream& r) { return task_.decompose(g, r); };
    }

    std::function<double(const Goal&, const PoolEntry&)> verifier_value_fn() {
        return [this](const Goal& g, const PoolEntry& e) {
            return scorer_.verifier_value(tree_, g.id, e.id, e.trajectory);
        };
    }

    std::size_t unique_terminal_count() const {
        std::size_t n = 0;
        for (const PoolEntry& e : pool_.entries())
            if (e.trajectory.terminal && !e.duplicate) ++n;
        return n;
    }

    void update_best_terminal(RunResult& res, EntryId id, double terminal_value) {
        const PoolEntry& e = pool_[id];
        if (!res.found_terminal || terminal_value > res.best_terminal_value ||
            (terminal_value == res.best_terminal_value && e.score > res.best->score)) {
            res.found_terminal = true;
            res.best = e;
            res.best_terminal_value = terminal_value;
        }
    }

    void finalize_result(RunResult& res, std::int64_t t, std::chrono::steady_clock::time_point t0) {
        // final argmax over terminal entries: highest terminal verifier
        // value, then highest backward score, then lowest (oldest) id.
        res.found_terminal = false;
        res.best.reset();
        res.best_terminal_value = 0.0;
        for (const PoolEntry& e : pool_.entries()) {
            if (!e.trajectory.terminal) continue;
            const double v = scorer_.verifier_value(tree_, tree_.root_id, e.id, e.trajectory);
            if (!res.found_terminal || v > res.best_terminal_value ||
                (v == res.best_terminal_value && e.score > res.best->score)) {
                res.found_terminal = true;
                res.best = e;
                res.best_terminal_value = v;
            }
        }
        if (res.found_terminal) {
            emit(res,
                 make_event(t, EventKind::terminal, res.best->operator_tag,
                            res.best->parent_ids, static_cast<std::int64_t>(res.best->id),
                            res.best_terminal_value, 0.0),
                 t0);
        } else {
            // NoTerminalFound: surface the best-scored partial instead.
            const PoolEntry* top = nullptr;
            for (const PoolEntry& e : pool_.entries())
                if (!top || e.score > top->score) top = &e;
            if (top) res.best = *top;
            log::info("no terminal trajectory found within budget; returning best partial");
        }
        res.unique_terminals = unique_terminal_count();
        res.policy_calls = policy_calls_;
        res.verifier_calls = scorer_.stats().calls;
        res.verifier_failures = scorer_.stats().failures;
        res.pool = std::move(pool_);
        res.tree = std::move(tree_);
    }

    TraceEvent make_event(std::int64_t step, EventKind kind, OpKind op,
                          std::vector<EntryId> parents, std::int64_t child_id, double child_score,
                          double tau) {
        TraceEvent ev;
        ev.step = step;
        ev.kind = kind;
        ev.operator_tag = op;
        ev.parent_ids = std::move(parents);
        ev.child_id = child_id;
        ev.child_score = child_score;
        ev.tau = tau;
        ev.policy_calls_cumulative = policy_calls_;
        ev.tree_version = tree_.version;
        return ev;
    }

    void emit(RunResult& res, TraceEvent ev, std::chrono::steady_clock::time_point t0) {
        if (cfg_.record_wall_time)
            ev.wall_micros = static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::microseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count());
        res.events.push_back(std::move(ev));
    }

    const tasks::TaskBundle& task_;
    EngineConfig cfg_;
    backward::BackwardScorer scorer_;
    RngStream rng_;
    CandidatePool pool_;
    GoalTreeState tree_;
    std::uint64_t policy_calls_ = 0;
};

/// Runs the full search for one task under one configuration.
inline RunResult run(const tasks::TaskBundle& task, const EngineConfig& cfg) {
    return Engine(task, cfg).run();
}

/// Up to `group_size` unique terminal trajectories ranked by terminal
/// verifier value then stored score; short groups are padded with fresh full
/// policy rollouts. Padding calls are charged to `policy_calls` and may be
/// traced as pad_rollout events.
struct TrainingGroup {
    std::vector<Trajectory> trajectories;
    std::size_t from_pool = 0;
    std::uint64_t policy_calls = 0;
};

inline TrainingGroup extract_training_group(const CandidatePool& pool, const GoalTreeState& tree,
                                            std::size_t group_size,
                                            const tasks::TaskBundle& policy,
                                            std::uint32_t max_rollout_len, RngStream& rng,
                                            std::vector<TraceEvent>* trace = nullptr,
                                            std::uint64_t calls_base = 0,
                                            std::int64_t step_base = 0) {
    if (group_size < 1) throw std::invalid_argument("extract_training_group: group_size >= 1");
    struct Ranked {
        const PoolEntry* e;
        double terminal_v;
    };
    std::vector<Ranked> terminals;
    for (const PoolEntry& e : pool.entries())
        if (e.trajectory.terminal && !e.duplicate)
            terminals.push_back({&e, backward::eval_verifier(tree.root(), e.trajectory, nullptr)});
    std::sort(terminals.begin(), terminals.end(), [](const Ranked& a, const Ranked& b) {
        if (a.terminal_v != b.terminal_v) return a.terminal_v > b.terminal_v;
        if (a.e->score != b.e->score) return a.e->score > b.e->score;
        return a.e->id < b.e->id;
    });

    TrainingGroup out;
    for (const Ranked& r : terminals) {
        if (out.trajectories.size() >= group_size) break;
        out.trajectories.push_back(r.e->trajectory);
    }
    out.from_pool = out.trajectories.size();

    std::int64_t step = step_base;
    while (out.trajectories.size() < group_size) {
        Trajectory t;
        std::uint64_t calls = 0;
        while (!policy.is_terminal(t) && t.size() < max_rollout_len) {
            auto s = policy.next_step(t, rng);
            calls += 1;
            if (!s) break;
            t.steps.push_back(std::move(*s));
        }
        t.terminal = policy.is_terminal(t);
        out.policy_calls += calls;
        if (trace) {
            TraceEvent ev;
            ev.step = step++;
            ev.kind = EventKind::pad_rollout;
            ev.operator_tag = OpKind::expand;
            ev.child_id = -1;
            ev.child_score = backward::eval_verifier(tree.root(), t, nullptr);
            ev.policy_calls_cumulative = calls_base + out.policy_calls;
            ev.tree_version = tree.version;
            trace->push_back(std::move(ev));
        }
        out.trajectories.push_back(std::move(t));
    }
    return out;
}

} // namespace bes
