// Acceptance suite: one pass/fail line per criterion.
//
// Runs the full operator-exhaustive sweep, selection fidelity, scoring oracle
// equivalence, both theorem reproductions, effective-score dominance, the
// paired end-to-end search comparison, determinism/replay, and budget
// discipline. Exit code 0 iff every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bes/engine.hpp"
#include "bes/tasks.hpp"
#include "bes/theorylab.hpp"
#include "bes/trace.hpp"

using namespace bes;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string format(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

struct Check {
    bool ok = true;
    std::string detail;

    void fail(std::string why) {
        if (ok) detail = std::move(why);
        ok = false;
    }
    void note(std::string what) {
        if (ok && detail.empty()) detail = std::move(what);
    }
    void require(bool cond, std::string why) {
        if (!cond) fail(std::move(why));
    }
};

// ---------------------------------------------------------------------------
// Criterion 1: exhaustive operator suite

Trajectory from_string(const std::string& s) {
    Trajectory t;
    for (char c : s) t.steps.push_back(Step{std::string(1, c)});
    return t;
}

Check criterion1() {
    Check c;
    std::vector<std::string> all = {""};
    for (std::size_t start = 0, len = 1; len <= 6; ++len) {
        const std::size_t end = all.size();
        for (std::size_t i = start; i < end; ++i)
            for (char ch : {'a', 'b', 'c'}) all.push_back(all[i] + ch);
        start = end;
    }
    std::vector<Trajectory> trajs;
    trajs.reserve(all.size());
    for (const auto& s : all) trajs.push_back(from_string(s));

    // per-symbol multisets for the no-fabrication check
    std::vector<std::array<int, 3>> counts(all.size(), {0, 0, 0});
    for (std::size_t i = 0; i < all.size(); ++i)
        for (char ch : all[i]) counts[i][ch - 'a'] += 1;

    const auto count_of = [](const Trajectory& t) {
        std::array<int, 3> k = {0, 0, 0};
        for (const auto& s : t.steps) k[s.payload[0] - 'a'] += 1;
        return k;
    };
    const auto contained = [](const std::array<int, 3>& got, const std::array<int, 3>& cap) {
        return got[0] <= cap[0] && got[1] <= cap[1] && got[2] <= cap[2];
    };

    std::uint64_t outputs = 0;
    for (std::size_t ia = 0; ia < trajs.size() && c.ok; ++ia) {
        const Trajectory& a = trajs[ia];
        // deletion: single-parent, all interior indices
        if (a.size() >= 3) {
            for (std::size_t l = 2; l <= a.size() - 1; ++l) {
                const auto out = forward::delete_at(a, l);
                ++outputs;
                if (!out || out->size() != a.size() - 1 ||
                    !contained(count_of(*out), counts[ia]) ||
                    out->steps.front() != a.steps.front() || out->steps.back() != a.steps.back()) {
                    c.fail(format("delete law violated on '%s' l=%zu", all[ia].c_str(), l));
                    break;
                }
            }
        }
        for (std::size_t ib = 0; ib < trajs.size() && c.ok; ++ib) {
            const Trajectory& b = trajs[ib];
            const std::size_t s = common_prefix_len(a, b);
            const std::size_t ma = a.size() - s, mb = b.size() - s;
            std::array<int, 3> cap = counts[ia];
            cap[0] += counts[ib][0];
            cap[1] += counts[ib][1];
            cap[2] += counts[ib][2];

            const Trajectory comb = forward::combine(a, b);
            ++outputs;
            if (comb.size() != s + ma + mb || !contained(count_of(comb), cap)) {
                c.fail(format("combine law violated on ('%s','%s')", all[ia].c_str(),
                              all[ib].c_str()));
                break;
            }
            for (std::size_t r = 1; r <= ma && c.ok; ++r)
                for (std::size_t q = 1; q <= mb; ++q) {
                    const auto out = forward::translocate_at(a, b, r, q);
                    ++outputs;
                    if (!out || out->size() != s + ma || !contained(count_of(*out), cap)) {
                        c.fail(format("translocate law violated on ('%s','%s') r=%zu q=%zu",
                                      all[ia].c_str(), all[ib].c_str(), r, q));
                        break;
                    }
                }
            for (std::size_t i = 0; i <= ma && c.ok; ++i)
                for (std::size_t j = 0; j + 1 <= mb; ++j) {
                    const auto out = forward::crossover_at(a, b, i, j);
                    ++outputs;
                    if (!out || out->size() != s + i + (mb - j) ||
                        !contained(count_of(*out), cap)) {
                        c.fail(format("crossover law violated on ('%s','%s') i=%zu j=%zu",
                                      all[ia].c_str(), all[ib].c_str(), i, j));
                        break;
                    }
                }
        }
    }
    c.note(format("%llu operator outputs over %zu^2 pairs",
                  static_cast<unsigned long long>(outputs), trajs.size()));
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 2: selection fidelity

PoolEntry mk_entry(EntryId id, double score, std::uint32_t degree) {
    PoolEntry e;
    e.id = id;
    e.score = score;
    e.degree = degree;
    return e;
}

Check criterion2() {
    Check c;
    constexpr int kDraws = 100000;
    constexpr double kTau = 0.8;
    constexpr double kLambda = 0.1;

    for (const std::size_t pool_size : {std::size_t{2}, std::size_t{5}, std::size_t{20}}) {
        std::vector<PoolEntry> entries;
        RngStream build(900 + pool_size);
        for (std::size_t i = 0; i < pool_size; ++i)
            entries.push_back(
                mk_entry(i, build.uniform01(), build.bernoulli(0.3) ? 0 : 1));
        std::vector<const PoolEntry*> view;
        for (const auto& e : entries) view.push_back(&e);

        // single-parent closed form via long-double softmax
        std::vector<long double> weights(pool_size);
        long double z = 0.0L;
        for (std::size_t i = 0; i < pool_size; ++i) {
            weights[i] =
                std::exp(static_cast<long double>(forward::bonus_score(entries[i], kLambda)) / kTau);
            z += weights[i];
        }
        std::vector<int> hits(pool_size, 0);
        RngStream rng(1234 + pool_size);
        for (int d = 0; d < kDraws; ++d)
            hits[*forward::select_single_parent(view, kTau, kLambda, rng)] += 1;
        for (std::size_t i = 0; i < pool_size; ++i) {
            const double p = static_cast<double>(weights[i] / z);
            const double phat = hits[i] / static_cast<double>(kDraws);
            const double sigma = std::sqrt(p * (1 - p) / kDraws);
            if (std::abs(phat - p) > 3 * sigma)
                c.fail(format("single selection off at pool %zu entry %zu: |%.5f-%.5f| > 3sigma",
                              pool_size, i, phat, p));
        }

        // pair closed form: score = mean of entry scores
        const forward::PairScoreFn pair_fn = [](const PoolEntry& x, const PoolEntry& y) {
            return 0.5 * (x.score + y.score);
        };
        std::map<std::pair<std::size_t, std::size_t>, long double> pair_w;
        long double pz = 0.0L;
        for (std::size_t i = 0; i < pool_size; ++i)
            for (std::size_t j = i + 1; j < pool_size; ++j) {
                pair_w[{i, j}] =
                    std::exp(static_cast<long double>(pair_fn(entries[i], entries[j])) / kTau);
                pz += pair_w[{i, j}];
            }
        std::map<std::pair<std::size_t, std::size_t>, int> pair_hits;
        RngStream prng(4321 + pool_size);
        for (int d = 0; d < kDraws; ++d)
            pair_hits[*forward::select_parent_pair(view, pair_fn, kTau, prng)] += 1;
        for (const auto& [key, w] : pair_w) {
            const double p = static_cast<double>(w / pz);
            const double phat = pair_hits[key] / static_cast<double>(kDraws);
            const double sigma = std::sqrt(p * (1 - p) / kDraws);
            if (std::abs(phat - p) > 3 * sigma)
                c.fail(format("pair selection off at pool %zu pair (%zu,%zu)", pool_size, key.first,
                              key.second));
        }
    }

    // lambda-bonus construction: degree-0 score 0.5 vs degree-1 score 0.6
    std::vector<PoolEntry> entries = {mk_entry(0, 0.5, 0), mk_entry(1, 0.6, 1)};
    std::vector<const PoolEntry*> view = {&entries[0], &entries[1]};
    if (forward::bonus_score(entries[0], 0.1) != forward::bonus_score(entries[1], 0.1))
        c.fail("lambda bonus does not equalize 0.5+0.1 against 0.6");
    int first = 0;
    RngStream rng(55);
    for (int d = 0; d < kDraws; ++d)
        if (*forward::select_single_parent(view, 1.0, 0.1, rng) == 0) ++first;
    const double phat = first / static_cast<double>(kDraws);
    if (std::abs(phat - 0.5) > 3 * std::sqrt(0.25 / kDraws))
        c.fail(format("lambda-bonus selection frequency %.5f not 0.5", phat));

    c.note(format("pools {2,5,20}, %d draws each, 3 binomial sigma", kDraws));
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 3: scoring oracle equivalence

GoalTreeState random_tree(RngStream& rng, std::map<GoalId, double>& values) {
    GoalTreeState tree = GoalTreeState::make_root("root", nullptr);
    const auto assign = [&](GoalId id) {
        const double v = rng.bernoulli(0.15) ? 1.0 : rng.uniform01();
        values[id] = v;
        return v;
    };
    tree.at(0).verifier = [v = assign(0)](const Trajectory&) { return v; };
    std::vector<std::pair<GoalId, std::uint32_t>> frontier = {{0, 0}};
    while (!frontier.empty()) {
        auto [gid, depth] = frontier.back();
        frontier.pop_back();
        if (depth >= 4 || rng.bernoulli(0.3)) continue;
        const std::size_t fanout = 1 + rng.uniform_index(3);
        std::vector<GoalSpec> kids(fanout);
        for (auto& k : kids) k.verifier = [](const Trajectory&) { return 0.0; };
        for (GoalId id : tree.attach_children(gid, std::move(kids))) {
            tree.at(id).verifier = [v = assign(id)](const Trajectory&) { return v; };
            frontier.push_back({id, depth + 1});
        }
    }
    return tree;
}

double naive_reference(const GoalTreeState& tree, GoalId gid, double alpha,
                       const std::map<GoalId, double>& values) {
    const double v = values.at(gid);
    if (v == 1.0) return 1.0;
    const Goal& g = tree.at(gid);
    if (g.children.empty()) return v;
    double sum = 0.0;
    for (GoalId child : g.children) sum += naive_reference(tree, child, alpha, values);
    return alpha * v + (1.0 - alpha) * (sum / static_cast<double>(g.children.size()));
}

Check criterion3() {
    Check c;
    RngStream rng(606);
    int short_circuits = 0;
    for (int it = 0; it < 1000 && c.ok; ++it) {
        std::map<GoalId, double> values;
        const GoalTreeState tree = random_tree(rng, values);
        const double alpha = rng.uniform01();

        backward::BackwardScorer scorer(alpha);
        const double got = scorer.score(tree, 0, Trajectory{});
        const double want = naive_reference(tree, 0, alpha, values);
        if (got != want) { // bitwise
            c.fail(format("tree %d: production %.17g != reference %.17g", it, got, want));
            break;
        }
        const double uncached = backward::backward_score(Trajectory{}, tree, alpha);
        if (uncached != want) c.fail(format("tree %d: uncached path diverges", it));

        // short-circuit economy with counting verifiers
        GoalTreeState counting = tree;
        auto calls = std::make_shared<std::map<GoalId, int>>();
        for (Goal& g : counting.goals) {
            g.verifier = [calls, id = g.id, v = values[g.id]](const Trajectory&) {
                (*calls)[id] += 1;
                return v;
            };
        }
        backward::backward_score(Trajectory{}, counting, alpha);
        for (const Goal& g : counting.goals) {
            if (values[g.id] != 1.0) continue;
            ++short_circuits;
            std::vector<GoalId> stack(g.children.begin(), g.children.end());
            while (!stack.empty()) {
                const GoalId d = stack.back();
                stack.pop_back();
                const auto it2 = calls->find(d);
                if (it2 != calls->end() && it2->second != 0)
                    c.fail(format("descendant verifier %u ran under a satisfied goal", d));
                const auto& dc = counting.at(d).children;
                stack.insert(stack.end(), dc.begin(), dc.end());
            }
        }
    }
    c.note(format("1000 random trees, %d short-circuited subtrees verified", short_circuits));
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 4: sub-goal sample-complexity gap

Check criterion4() {
    Check c;
    theory::SubgoalExperimentConfig cfg;
    cfg.m = 4;
    cfg.p = 0.5;
    cfg.delta = 0.1;
    cfg.trials = 10000;
    cfg.seed = 20250810;
    const auto rep = theory::subgoal_experiment(cfg);

    c.require(std::abs(rep.n_term_hat - 16.0) <= 1.6,
              format("n_term %.3f not within 10%% of 16", rep.n_term_hat));
    c.require(rep.n_bidir_hat <= rep.union_bound,
              format("n_bidir %.3f above the union bound %.3f", rep.n_bidir_hat, rep.union_bound));
    c.require(rep.ratio > 2.0, format("ratio %.3f not > 2", rep.ratio));

    double prev = 0.0;
    std::string ratios;
    for (std::size_t m : {2, 3, 4, 5}) {
        theory::SubgoalExperimentConfig mc = cfg;
        mc.m = m;
        const auto r = theory::subgoal_experiment(mc);
        c.require(r.ratio > prev, format("ratio not strictly increasing at m=%zu", m));
        prev = r.ratio;
        ratios += format("%.2f ", r.ratio);
    }
    c.note(format("n_term=%.2f n_bidir=%.1f ratios(m=2..5)= %s", rep.n_term_hat, rep.n_bidir_hat,
                  ratios.c_str()));
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 5: shell confinement and escape

Check criterion5() {
    Check c;
    theory::ShellExperimentConfig cfg; // (0.9,0.1)/(0.1,0.9), T in {16,32,64}, k=2
    cfg.n_samples = 100000;
    cfg.seed = 424242;
    cfg.measure_crossover = false;
    const auto rep = theory::shell_experiment(cfg);

    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        c.require(rep.rows[i].escape_rate < rep.rows[i - 1].escape_rate,
                  format("escape rate not decreasing: %.4f -> %.4f", rep.rows[i - 1].escape_rate,
                         rep.rows[i].escape_rate));
    for (const auto& r : rep.rows)
        c.require(r.evolution_mean_surprise >= r.H_T + r.TC - 3 * r.evolution_se,
                  format("T=%zu evolution mean %.4f below H+TC-3SE", r.T,
                         r.evolution_mean_surprise));

    theory::ShellExperimentConfig iid = cfg;
    iid.transitions = {{0.7, 0.3}, {0.7, 0.3}};
    const auto control = theory::shell_experiment(iid);
    for (const auto& r : control.rows) {
        c.require(std::abs(r.TC) < 1e-12, format("iid TC nonzero at T=%zu", r.T));
        c.require(std::abs(r.evolution_mean_surprise - r.H_T) <= 3 * r.evolution_se,
                  format("iid control gap %.4f beyond 3SE at T=%zu",
                         r.evolution_mean_surprise - r.H_T, r.T));
    }
    c.note(format("escape %.3f/%.3f/%.3f, gaps>=TC at all T, iid control clean",
                  rep.rows[0].escape_rate, rep.rows[1].escape_rate, rep.rows[2].escape_rate));
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 6: effective-score dominance

Check criterion6() {
    Check c;
    RngStream rng(31337);
    for (int it = 0; it < 10000 && c.ok; ++it) {
        const double precision = std::pow(10.0, -static_cast<double>(rng.uniform_index(4)));
        const double lo = rng.uniform01() * 10.0;
        const double hi = lo + precision * (1.0 + rng.uniform_index(9));
        const double b_lo = rng.uniform01(), b_hi = rng.uniform01();
        const double e_hi = effective_score(hi, b_hi, precision);
        const double e_lo = effective_score(lo, b_lo, precision);
        if (!(e_hi > e_lo))
            c.fail(format("dominance violated: raw %.6f/backward %.3f vs raw %.6f/backward %.3f",
                          hi, b_hi, lo, b_lo));
    }
    c.note("10000 randomized pairs with raw gap >= precision");
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 7: end-to-end search benefit, paired over 50 seeds

Check criterion7() {
    Check c;
    constexpr int kSeeds = 50;
    int bes_solved = 0, exp_solved = 0;
    std::vector<double> diffs;

    for (int seed = 0; seed < kSeeds; ++seed) {
        RngStream expr_rng(5000 + seed);
        const auto expr = tasks::arith::generate(3, expr_rng);
        tasks::ArithmeticTask task(tasks::arith::to_text(*expr), 0.6);

        // Experiment configuration: default operator mixture, the sharper
        // annealing pair used for the harder benchmark setups, a denser
        // decomposition cadence, and 4-step expansions. Both arms share it;
        // the baseline only drops the evolution operators and the goal tree.
        EngineConfig full;
        full.budget_B = 200;
        full.rng_seed = static_cast<std::uint64_t>(seed);
        full.tau_0 = 1.5;
        full.tau_end = 0.15;
        full.K_dec = 5;
        full.K_max = 4;
        const RunResult a = run(task, full);
        const bool a_solved = a.found_terminal && a.best_terminal_value == 1.0;

        EngineConfig expansion_only = full;
        expansion_only.operator_probs = {1.0, 0.0, 0.0, 0.0, 0.0};
        expansion_only.K_dec = 0; // no goal decomposition: root verifier only
        const RunResult b = run(task, expansion_only);
        const bool b_solved = b.found_terminal && b.best_terminal_value == 1.0;

        bes_solved += a_solved;
        exp_solved += b_solved;
        diffs.push_back(static_cast<double>(a_solved) - static_cast<double>(b_solved));
    }

    double mean = 0;
    for (double d : diffs) mean += d;
    mean /= diffs.size();
    double var = 0;
    for (double d : diffs) var += (d - mean) * (d - mean);
    var /= (diffs.size() - 1);
    const double se = std::sqrt(var / diffs.size());
    const double margin = mean - 1.96 * se;

    c.require(margin > 0.0,
              format("paired margin not significant: mean diff %.3f, 95%% CI lower %.3f", mean,
                     margin));
    c.note(format("solve rate %d/%d vs %d/%d, paired diff %.3f (CI lower %.3f)", bes_solved,
                  kSeeds, exp_solved, kSeeds, mean, margin));
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 8: determinism and replay

Check criterion8() {
    Check c;
    const auto dir = std::filesystem::temp_directory_path() / "bes_acceptance";
    std::filesystem::create_directories(dir);
    const std::string path_a = (dir / "a.jsonl").string();
    const std::string path_b = (dir / "b.jsonl").string();

    tasks::ArithmeticTask task("((4 + 6) * 3) / 2 - 5", 0.6);
    EngineConfig cfg;
    cfg.budget_B = 200;
    cfg.rng_seed = 2718;
    cfg.mode = RunMode::group_collect;

    const auto run1 = trace::run_full(task, cfg);
    const auto run2 = trace::run_full(task, cfg);
    const auto header = trace::make_header(cfg, task);
    trace::write_file(path_a, header, run1.result.events);
    trace::write_file(path_b, header, run2.result.events);

    std::ifstream fa(path_a, std::ios::binary), fb(path_b, std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(fa)), {});
    const std::string bytes_b((std::istreambuf_iterator<char>(fb)), {});
    c.require(bytes_a == bytes_b, "same (seed, config) produced different trace bytes");

    c.require(trace::replay_file(path_a).status == trace::ReplayStatus::ok,
              "clean replay did not exit 0");

    // single-field fault injection is detected at the right step
    std::vector<std::string> lines;
    {
        std::ifstream in(path_a);
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
    }
    const std::size_t victim = lines.size() / 2;
    auto j = nlohmann::ordered_json::parse(lines[victim]);
    const std::int64_t victim_step = j["step"].get<std::int64_t>();
    j["child_score"] = j["child_score"].get<double>() + 0.0625;
    lines[victim] = j.dump();
    {
        std::ofstream out(path_a, std::ios::trunc);
        for (const auto& l : lines) out << l << "\n";
    }
    const auto rep = trace::replay_file(path_a);
    c.require(rep.status == trace::ReplayStatus::diverged, "fault injection not detected");
    c.require(rep.diverged_step == victim_step,
              format("divergence reported at step %lld, expected %lld",
                     static_cast<long long>(rep.diverged_step),
                     static_cast<long long>(victim_step)));
    c.note(format("%zu trace lines byte-identical; fault at step %lld pinpointed", lines.size(),
                  static_cast<long long>(victim_step)));
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 9: budget discipline

Check criterion9() {
    Check c;
    RngStream meta(99);
    std::uint64_t total_calls = 0;
    for (int it = 0; it < 20 && c.ok; ++it) {
        EngineConfig cfg;
        cfg.budget_B = meta.uniform_index(250);
        cfg.K_max = 1 + static_cast<std::uint32_t>(meta.uniform_index(6));
        cfg.K_dec = static_cast<std::uint32_t>(meta.uniform_index(16));
        cfg.lambda = meta.uniform01() * 0.2;
        cfg.tau_end = 0.2 + meta.uniform01();
        cfg.tau_0 = cfg.tau_end + meta.uniform01() * 2.0;
        cfg.alpha = meta.uniform01();
        cfg.rng_seed = meta.next_u64();
        cfg.decompose_trigger =
            meta.bernoulli(0.5) ? DecomposeTrigger::interval : DecomposeTrigger::stagnation;
        cfg.mode = meta.bernoulli(0.5) ? RunMode::inference : RunMode::group_collect;
        double w[5];
        double sum = 0;
        for (double& x : w) sum += (x = 0.02 + meta.uniform01());
        cfg.operator_probs = {w[0] / sum, w[1] / sum, w[2] / sum, w[3] / sum, w[4] / sum};
        cfg.operator_probs.expand += 1.0 - cfg.operator_probs.sum();

        std::unique_ptr<tasks::TaskBundle> task;
        if (meta.bernoulli(0.5))
            task = std::make_unique<tasks::ArithmeticTask>("(2 + 3) * (4 + 5)", 0.6);
        else
            task = std::make_unique<tasks::BernoulliSubgoalTask>(
                4, std::vector<double>{0.4, 0.4, 0.4, 0.4});

        const RunResult res = run(*task, cfg);
        if (res.policy_calls > cfg.budget_B) {
            c.fail(format("config %d: %llu calls over budget %llu", it,
                          static_cast<unsigned long long>(res.policy_calls),
                          static_cast<unsigned long long>(cfg.budget_B)));
            break;
        }
        std::uint64_t prev = 0, attributed = 0;
        for (const TraceEvent& ev : res.events) {
            if (ev.policy_calls_cumulative < prev) {
                c.fail(format("config %d: cumulative calls decreased", it));
                break;
            }
            const std::uint64_t delta = ev.policy_calls_cumulative - prev;
            if (delta > 0 &&
                !((ev.kind == EventKind::forward && ev.operator_tag == OpKind::expand) ||
                  ev.kind == EventKind::pad_rollout))
                c.fail(format("config %d: %llu calls not attributable to an expansion", it,
                              static_cast<unsigned long long>(delta)));
            attributed += delta;
            prev = ev.policy_calls_cumulative;
        }
        if (attributed != res.policy_calls)
            c.fail(format("config %d: trace reconciles %llu of %llu calls", it,
                          static_cast<unsigned long long>(attributed),
                          static_cast<unsigned long long>(res.policy_calls)));
        total_calls += res.policy_calls;
    }
    c.note(format("20 random configs, %llu calls reconciled",
                  static_cast<unsigned long long>(total_calls)));
    return c;
}

struct Criterion {
    int id;
    const char* title;
    std::function<Check()> fn;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "operator exhaustive suite (length laws + no fabrication)", criterion1},
        {2, "Boltzmann selection fidelity (single + pair + lambda bonus)", criterion2},
        {3, "scoring oracle equivalence + short-circuit economy", criterion3},
        {4, "sub-goal sample-complexity gap (terminal-only vs coverage)", criterion4},
        {5, "entropy-shell confinement and escape", criterion5},
        {6, "effective-score raw-objective dominance", criterion6},
        {7, "end-to-end search benefit over expansion-only (paired)", criterion7},
        {8, "determinism and replay with fault injection", criterion8},
        {9, "budget discipline and trace reconciliation", criterion9},
    };

    int failures = 0;
    for (const auto& cr : criteria) {
        const double t0 = now_seconds();
        const Check result = cr.fn();
        const double dt = now_seconds() - t0;
        std::printf("[%s] criterion %d: %s (%s, %.1fs)\n", result.ok ? "PASS" : "FAIL", cr.id,
                    cr.title, result.detail.c_str(), dt);
        std::fflush(stdout);
        if (!result.ok) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
