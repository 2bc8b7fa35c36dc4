#pragma once

// EngineConfig <-> JSON. Field names mirror the struct; unknown keys are
// rejected so config-file typos surface as errors instead of silent defaults.

#include <string>

#include <json.hpp>

#include "bes/core.hpp"

namespace bes {

inline nlohmann::ordered_json config_to_json(const EngineConfig& c) {
    nlohmann::ordered_json j;
    j["budget_B"] = c.budget_B;
    j["K_dec"] = c.K_dec;
    j["K_max"] = c.K_max;
    j["lambda"] = c.lambda;
    j["tau_0"] = c.tau_0;
    j["tau_end"] = c.tau_end;
    j["alpha"] = c.alpha;
    j["operator_probs"] = {{"expand", c.operator_probs.expand},
                           {"combine", c.operator_probs.combine},
                           {"delete", c.operator_probs.deletion},
                           {"translocate", c.operator_probs.translocate},
                           {"crossover", c.operator_probs.crossover}};
    j["group_target"] = c.group_target;
    j["rng_seed"] = c.rng_seed;
    j["scoring_mode"] =
        c.scoring_mode == ScoringMode::recursive ? "recursive" : "bucket_interpolation";
    j["bucket_precision"] = c.bucket_precision;
    j["mode"] = c.mode == RunMode::inference ? "inference" : "group_collect";
    j["decompose_trigger"] =
        c.decompose_trigger == DecomposeTrigger::interval ? "interval" : "stagnation";
    j["stagnation_S"] = c.stagnation_S;
    j["stagnation_delta"] = c.stagnation_delta;
    j["allow_terminal_splice"] = c.allow_terminal_splice;
    j["max_tree_depth"] = c.max_tree_depth;
    j["max_rollout_len"] = c.max_rollout_len;
    j["record_wall_time"] = c.record_wall_time;
    return j;
}

/// Parses a (possibly partial) config; missing fields keep their defaults.
/// Throws std::invalid_argument naming the offending field.
inline EngineConfig config_from_json(const nlohmann::json& j) {
    EngineConfig c;
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "budget_B") c.budget_B = value.get<std::uint64_t>();
            else if (key == "K_dec") c.K_dec = value.get<std::uint32_t>();
            else if (key == "K_max") c.K_max = value.get<std::uint32_t>();
            else if (key == "lambda") c.lambda = value.get<double>();
            else if (key == "tau_0") c.tau_0 = value.get<double>();
            else if (key == "tau_end") c.tau_end = value.get<double>();
            else if (key == "alpha") c.alpha = value.get<double>();
            else if (key == "operator_probs") {
                for (const auto& [op, p] : value.items()) {
                    if (op == "expand") c.operator_probs.expand = p.get<double>();
                    else if (op == "combine") c.operator_probs.combine = p.get<double>();
                    else if (op == "delete") c.operator_probs.deletion = p.get<double>();
                    else if (op == "translocate") c.operator_probs.translocate = p.get<double>();
                    else if (op == "crossover") c.operator_probs.crossover = p.get<double>();
                    else throw std::invalid_argument("config.operator_probs." + op + ": unknown operator");
                }
            } else if (key == "group_target") c.group_target = value.get<std::uint32_t>();
            else if (key == "rng_seed") c.rng_seed = value.get<std::uint64_t>();
            else if (key == "scoring_mode") {
                const auto s = value.get<std::string>();
                if (s == "recursive") c.scoring_mode = ScoringMode::recursive;
                else if (s == "bucket_interpolation") c.scoring_mode = ScoringMode::bucket_interpolation;
                else throw std::invalid_argument("config.scoring_mode: '" + s + "' is not a mode");
            } else if (key == "bucket_precision") c.bucket_precision = value.get<double>();
            else if (key == "mode") {
                const auto s = value.get<std::string>();
                if (s == "inference") c.mode = RunMode::inference;
                else if (s == "group_collect") c.mode = RunMode::group_collect;
                else throw std::invalid_argument("config.mode: '" + s + "' is not a mode");
            } else if (key == "decompose_trigger") {
                const auto s = value.get<std::string>();
                if (s == "interval") c.decompose_trigger = DecomposeTrigger::interval;
                else if (s == "stagnation") c.decompose_trigger = DecomposeTrigger::stagnation;
                else throw std::invalid_argument("config.decompose_trigger: '" + s + "' is not a trigger");
            } else if (key == "stagnation_S") c.stagnation_S = value.get<std::uint32_t>();
            else if (key == "stagnation_delta") c.stagnation_delta = value.get<double>();
            else if (key == "allow_terminal_splice") c.allow_terminal_splice = value.get<bool>();
            else if (key == "max_tree_depth") c.max_tree_depth = value.get<std::uint32_t>();
            else if (key == "max_rollout_len") c.max_rollout_len = value.get<std::uint32_t>();
            else if (key == "record_wall_time") c.record_wall_time = value.get<bool>();
            else throw std::invalid_argument("config." + key + ": unknown field");
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("config." + key + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

} // namespace bes
