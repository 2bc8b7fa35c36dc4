// bes: command-line front end for the search engine and the theory lab.
//
//   bes run    --task arithmetic --budget 200 --seed 7 --trace out.jsonl
//   bes theory shell --preset correlated --report shell.json --csv shell.csv
//   bes theory subgoals --m 4 --p 0.5 --delta 0.1 --trials 10000
//   bes replay out.jsonl
//
// Exit codes: 0 ok; 2 config error; 3 task construction failure;
// 4 replay divergence.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bes/config_io.hpp"
#include "bes/engine.hpp"
#include "bes/tasks.hpp"
#include "bes/theorylab.hpp"
#include "bes/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitTask = 3;
constexpr int kExitDiverged = 4;

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file: " + path);
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config file " + path + ": " + e.what());
    }
}

nlohmann::ordered_json default_task_spec(const std::string& name) {
    if (name == "arithmetic")
        return {{"name", "arithmetic"}, {"expression", "((4 + 6) * 3) / 2 - 5"}, {"q", 0.6}};
    if (name == "bernoulli") return {{"name", "bernoulli"}, {"m", 4}, {"p", {0.5, 0.5, 0.5, 0.5}}};
    if (name == "markov")
        return {{"name", "markov"},
                {"alphabet", 2},
                {"horizon", 16},
                {"transitions", {{0.9, 0.1}, {0.1, 0.9}}}};
    if (name == "circle_packing") return {{"name", "circle_packing"}};
    throw std::invalid_argument("unknown task: " + name);
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << body;
}

struct RunFlags {
    std::string config_path, task, trace_path;
    std::optional<std::uint64_t> budget, seed;
    std::optional<std::string> mode, scoring, trigger, expr;
    std::optional<double> q;
};

int cmd_run(const RunFlags& flags) {
    bes::EngineConfig cfg;
    nlohmann::json task_spec;
    try {
        if (!flags.config_path.empty()) {
            const auto file = load_json_file(flags.config_path);
            if (file.contains("engine")) cfg = bes::config_from_json(file.at("engine"));
            if (file.contains("task")) task_spec = file.at("task");
        }
        if (flags.budget) cfg.budget_B = *flags.budget;
        if (flags.seed) cfg.rng_seed = *flags.seed;
        if (flags.mode) {
            if (*flags.mode == "inference") cfg.mode = bes::RunMode::inference;
            else if (*flags.mode == "group_collect") cfg.mode = bes::RunMode::group_collect;
            else throw std::invalid_argument("--mode: expected inference|group_collect");
        }
        if (flags.scoring) {
            if (*flags.scoring == "recursive") cfg.scoring_mode = bes::ScoringMode::recursive;
            else if (*flags.scoring == "bucket_interpolation")
                cfg.scoring_mode = bes::ScoringMode::bucket_interpolation;
            else throw std::invalid_argument("--scoring: expected recursive|bucket_interpolation");
        }
        if (flags.trigger) {
            if (*flags.trigger == "interval") cfg.decompose_trigger = bes::DecomposeTrigger::interval;
            else if (*flags.trigger == "stagnation")
                cfg.decompose_trigger = bes::DecomposeTrigger::stagnation;
            else throw std::invalid_argument("--decompose-trigger: expected interval|stagnation");
        }
        if (!flags.task.empty() || task_spec.is_null()) {
            task_spec = default_task_spec(flags.task.empty() ? "arithmetic" : flags.task);
        }
        if (flags.expr) task_spec["expression"] = *flags.expr;
        if (flags.q) task_spec["q"] = *flags.q;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    std::unique_ptr<bes::tasks::TaskBundle> task;
    try {
        task = bes::tasks::make_task(task_spec);
    } catch (const std::exception& e) {
        std::cerr << "task error: " << e.what() << "\n";
        return kExitTask;
    }

    std::unique_ptr<bes::Engine> engine;
    try {
        engine = std::make_unique<bes::Engine>(*task, cfg);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    const auto t0 = std::chrono::steady_clock::now();
    bes::trace::FullRun fr = bes::trace::run_full(*task, cfg);
    const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    const bes::RunResult& res = fr.result;

    if (!flags.trace_path.empty())
        bes::trace::write_file(flags.trace_path, bes::trace::make_header(cfg, *task), res.events);

    nlohmann::ordered_json summary;
    summary["task"] = task->name();
    summary["found_terminal"] = res.found_terminal;
    summary["no_terminal_found"] = !res.found_terminal;
    summary["best_terminal_value"] = res.best_terminal_value;
    summary["best_score"] = res.best ? res.best->score : 0.0;
    summary["policy_calls"] = res.policy_calls;
    summary["padding_policy_calls"] = fr.group ? fr.group->policy_calls : 0;
    summary["verifier_calls"] = res.verifier_calls;
    summary["forward_steps"] = res.forward_steps;
    summary["pool_size"] = res.pool.size();
    summary["unique_terminals"] = res.unique_terminals;
    summary["tree_version"] = res.tree.version;
    summary["tree_goals"] = res.tree.goals.size();
    summary["early_exit"] = res.early_exit;
    if (fr.group) summary["training_group_size"] = fr.group->trajectories.size();
    summary["wall_ms"] = wall_ms;
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_theory_shell(const std::string& config_path, const std::string& preset,
                     std::optional<std::size_t> samples, std::optional<std::uint64_t> seed,
                     const std::string& report_path, const std::string& csv_path) {
    bes::theory::ShellExperimentConfig cfg;
    try {
        if (!config_path.empty()) {
            const auto j = load_json_file(config_path);
            if (j.contains("alphabet")) cfg.alphabet = j.at("alphabet").get<std::size_t>();
            if (j.contains("transitions"))
                cfg.transitions = j.at("transitions").get<std::vector<std::vector<double>>>();
            if (j.contains("init")) cfg.init = j.at("init").get<std::vector<double>>();
            if (j.contains("epsilon_factor")) cfg.epsilon_factor = j.at("epsilon_factor").get<double>();
            if (j.contains("epsilon_abs")) cfg.epsilon_abs = j.at("epsilon_abs").get<double>();
            if (j.contains("k_blocks")) cfg.k_blocks = j.at("k_blocks").get<std::size_t>();
            if (j.contains("n_samples")) cfg.n_samples = j.at("n_samples").get<std::size_t>();
            if (j.contains("horizons")) cfg.horizons = j.at("horizons").get<std::vector<std::size_t>>();
            if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        }
        if (preset == "iid") {
            cfg.transitions = {{0.7, 0.3}, {0.7, 0.3}};
        } else if (preset == "correlated" || preset.empty()) {
            cfg.transitions = {{0.9, 0.1}, {0.1, 0.9}};
        } else {
            throw std::invalid_argument("--preset: expected iid|correlated");
        }
        if (samples) cfg.n_samples = *samples;
        if (seed) cfg.seed = *seed;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    const auto rep = bes::theory::shell_experiment(cfg);
    if (!report_path.empty()) write_text_file(report_path, bes::theory::to_json(rep).dump(2) + "\n");
    if (!csv_path.empty()) write_text_file(csv_path, bes::theory::to_csv(rep));

    bool escape_monotone = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].escape_rate >= rep.rows[i - 1].escape_rate) escape_monotone = false;
    std::printf("[%s] expansion escape rate monotone decreasing over horizons\n",
                escape_monotone ? "PASS" : "FAIL");
    for (const auto& r : rep.rows) {
        const bool evo_ok =
            r.evolution_mean_surprise >= r.H_T + r.TC - 3.0 * r.evolution_se;
        std::printf("[%s] T=%zu evolution mean surprise %.4f >= H_T + TC - 3SE = %.4f\n",
                    evo_ok ? "PASS" : "FAIL", r.T, r.evolution_mean_surprise,
                    r.H_T + r.TC - 3.0 * r.evolution_se);
        if (r.TC <= 1e-12) {
            const bool gap_ok =
                std::abs(r.evolution_mean_surprise - r.H_T) <= 3.0 * r.evolution_se;
            std::printf("[%s] T=%zu zero-TC control gap |%.4f| <= 3SE\n", gap_ok ? "PASS" : "FAIL",
                        r.T, r.evolution_mean_surprise - r.H_T);
        }
        if (r.eq7_applicable) {
            const bool frac_ok =
                r.evolution_in_shell <= r.eq7_bound + 3.0 * r.evolution_in_shell_se;
            std::printf("[%s] T=%zu evolution in-shell fraction %.4f <= bound %.4f + 3SE\n",
                        frac_ok ? "PASS" : "FAIL", r.T, r.evolution_in_shell, r.eq7_bound);
        }
    }
    return kExitOk;
}

int cmd_theory_subgoals(std::size_t m, double p, double delta, std::size_t trials,
                        std::uint64_t seed, const std::string& report_path,
                        const std::string& csv_path) {
    bes::theory::SubgoalExperimentConfig cfg;
    cfg.m = m;
    cfg.p = p;
    cfg.delta = delta;
    cfg.trials = trials;
    cfg.seed = seed;
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    const auto rep = bes::theory::subgoal_experiment(cfg);
    if (!report_path.empty()) write_text_file(report_path, bes::theory::to_json(rep).dump(2) + "\n");
    if (!csv_path.empty()) write_text_file(csv_path, bes::theory::to_csv(rep));

    std::printf("n_term_hat=%.3f n_bidir_hat=%.3f ratio=%.3f union_bound=%.3f\n", rep.n_term_hat,
                rep.n_bidir_hat, rep.ratio, rep.union_bound);
    std::printf("[%s] coverage quantile within the union bound (%.3f <= %.3f)\n",
                rep.n_bidir_hat <= rep.union_bound ? "PASS" : "FAIL", rep.n_bidir_hat,
                rep.union_bound);
    return kExitOk;
}

int cmd_replay(const std::string& path) {
    const auto rep = bes::trace::replay_file(path);
    switch (rep.status) {
        case bes::trace::ReplayStatus::ok:
            std::printf("replay ok: %s\n", path.c_str());
            return kExitOk;
        case bes::trace::ReplayStatus::parse_error:
            std::cerr << "parse error: " << rep.message << "\n";
            return kExitConfig;
        case bes::trace::ReplayStatus::diverged:
            std::cerr << "replay diverged at step " << rep.diverged_step << " (line "
                      << rep.diverged_line << "): " << rep.message << "\n";
            return kExitDiverged;
    }
    return kExitConfig;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bidirectional evolutionary search over step trajectories"};
    app.require_subcommand(1);

    // run
    RunFlags rf;
    auto* run = app.add_subcommand("run", "Run a search and write trace + summary");
    run->add_option("--config", rf.config_path, "JSON config file (engine + task sections)");
    run->add_option("--task", rf.task, "built-in task: arithmetic|bernoulli|markov|circle_packing");
    run->add_option("--budget", rf.budget, "policy-call budget B");
    run->add_option("--seed", rf.seed, "rng seed");
    run->add_option("--trace", rf.trace_path, "trace output path (JSONL)");
    run->add_option("--mode", rf.mode, "inference|group_collect");
    run->add_option("--scoring", rf.scoring, "recursive|bucket_interpolation");
    run->add_option("--decompose-trigger", rf.trigger, "interval|stagnation");
    run->add_option("--expr", rf.expr, "arithmetic task expression");
    run->add_option("--q", rf.q, "arithmetic policy correctness probability");

    // theory
    auto* theory = app.add_subcommand("theory", "Theorem reproduction experiments");
    theory->require_subcommand(1);
    std::string th_config, th_preset, th_report, th_csv;
    std::optional<std::size_t> th_samples;
    std::optional<std::uint64_t> th_seed;
    auto* shell = theory->add_subcommand("shell", "Entropy-shell confinement and escape");
    shell->add_option("--config", th_config, "JSON experiment config");
    shell->add_option("--preset", th_preset, "iid|correlated");
    shell->add_option("--samples", th_samples, "Monte Carlo samples per horizon");
    shell->add_option("--seed", th_seed, "rng seed");
    shell->add_option("--report", th_report, "JSON report path");
    shell->add_option("--csv", th_csv, "CSV table path");

    std::size_t sg_m = 4, sg_trials = 10000;
    double sg_p = 0.5, sg_delta = 0.1;
    std::uint64_t sg_seed = 0;
    std::string sg_report, sg_csv;
    auto* subgoals = theory->add_subcommand("subgoals", "Terminal-only vs coverage sample counts");
    subgoals->add_option("--m", sg_m, "number of sub-goals");
    subgoals->add_option("--p", sg_p, "per-sub-goal success probability");
    subgoals->add_option("--delta", sg_delta, "coverage failure tolerance");
    subgoals->add_option("--trials", sg_trials, "Monte Carlo trials");
    subgoals->add_option("--seed", sg_seed, "rng seed");
    subgoals->add_option("--report", sg_report, "JSON report path");
    subgoals->add_option("--csv", sg_csv, "CSV table path");

    // replay
    std::string replay_path;
    auto* replay = app.add_subcommand("replay", "Re-execute a trace and verify byte equality");
    replay->add_option("trace", replay_path, "trace file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(rf);
        if (theory->parsed()) {
            if (shell->parsed())
                return cmd_theory_shell(th_config, th_preset, th_samples, th_seed, th_report, th_csv);
            if (subgoals->parsed())
                return cmd_theory_subgoals(sg_m, sg_p, sg_delta, sg_trials, sg_seed, sg_report,
                                           sg_csv);
        }
        if (replay->parsed()) return cmd_replay(replay_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
