#pragma once

// Trace persistence and replay. Traces are JSONL: a header line carrying the
// schema version, seed, full config and task spec (enough to re-execute the
// run), followed by one event object per line. With wall-time recording off
// (the default), traces are byte-identical across runs of the same
// (seed, config, task).

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bes/config_io.hpp"
#include "bes/engine.hpp"
#include "bes/tasks.hpp"

namespace bes::trace {

inline constexpr std::uint32_t kSchemaVersion = 1;

struct TraceParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline nlohmann::ordered_json event_to_json(const TraceEvent& ev) {
    nlohmann::ordered_json j;
    j["step"] = ev.step;
    j["kind"] = event_kind_name(ev.kind);
    j["operator_tag"] = op_kind_name(ev.operator_tag);
    j["parent_ids"] = ev.parent_ids;
    j["child_id"] = ev.child_id;
    j["child_score"] = ev.child_score;
    j["tau"] = ev.tau;
    j["policy_calls_cumulative"] = ev.policy_calls_cumulative;
    j["tree_version"] = ev.tree_version;
    j["wall_micros"] = ev.wall_micros;
    return j;
}

inline TraceEvent event_from_json(const nlohmann::json& j) {
    TraceEvent ev;
    try {
        ev.step = j.at("step").get<std::int64_t>();
        const auto kind = event_kind_from_name(j.at("kind").get<std::string>());
        if (!kind) throw TraceParseError("event.kind: unknown value");
        ev.kind = *kind;
        const auto op = op_kind_from_name(j.at("operator_tag").get<std::string>());
        if (!op) throw TraceParseError("event.operator_tag: unknown value");
        ev.operator_tag = *op;
        ev.parent_ids = j.at("parent_ids").get<std::vector<EntryId>>();
        ev.child_id = j.at("child_id").get<std::int64_t>();
        ev.child_score = j.at("child_score").get<double>();
        ev.tau = j.at("tau").get<double>();
        ev.policy_calls_cumulative = j.at("policy_calls_cumulative").get<std::uint64_t>();
        ev.tree_version = j.at("tree_version").get<std::uint64_t>();
        ev.wall_micros = j.at("wall_micros").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw TraceParseError(std::string("malformed trace event: ") + e.what());
    }
    return ev;
}

struct TraceHeader {
    std::uint32_t schema_version = kSchemaVersion;
    std::uint64_t seed = 0;
    nlohmann::ordered_json config;
    nlohmann::ordered_json task;
    std::uint64_t config_hash = 0;
};

inline TraceHeader make_header(const EngineConfig& cfg, const tasks::TaskBundle& task) {
    TraceHeader h;
    h.seed = cfg.rng_seed;
    h.config = config_to_json(cfg);
    h.task = task.spec_json();
    h.config_hash = fnv1a64(h.config.dump() + "|" + h.task.dump());
    return h;
}

inline std::string header_line(const TraceHeader& h) {
    nlohmann::ordered_json j;
    j["schema_version"] = h.schema_version;
    j["seed"] = h.seed;
    j["config_hash"] = h.config_hash;
    j["config"] = h.config;
    j["task"] = h.task;
    return j.dump();
}

inline TraceHeader parse_header_line(const std::string& line) {
    TraceHeader h;
    try {
        const auto j = nlohmann::ordered_json::parse(line);
        h.schema_version = j.at("schema_version").get<std::uint32_t>();
        h.seed = j.at("seed").get<std::uint64_t>();
        h.config_hash = j.at("config_hash").get<std::uint64_t>();
        h.config = j.at("config");
        h.task = j.at("task");
    } catch (const nlohmann::json::exception& e) {
        throw TraceParseError(std::string("malformed trace header: ") + e.what());
    }
    if (h.schema_version != kSchemaVersion)
        throw TraceParseError("unsupported trace schema version " +
                              std::to_string(h.schema_version));
    return h;
}

inline std::string serialize(const TraceHeader& h, std::span<const TraceEvent> events) {
    std::string out = header_line(h);
    out.push_back('\n');
    for (const TraceEvent& ev : events) {
        out += event_to_json(ev).dump();
        out.push_back('\n');
    }
    return out;
}

inline void write_file(const std::string& path, const TraceHeader& h,
                       std::span<const TraceEvent> events) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open trace file for writing: " + path);
    f << serialize(h, events);
}

struct ParsedTrace {
    TraceHeader header;
    std::vector<TraceEvent> events;
    std::vector<std::string> event_lines; ///< raw lines, for byte comparison
};

inline ParsedTrace parse_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw TraceParseError("cannot open trace file: " + path);
    ParsedTrace out;
    std::string line;
    if (!std::getline(f, line)) throw TraceParseError("empty trace file");
    out.header = parse_header_line(line);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        out.events.push_back(event_from_json([&] {
            try {
                return nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw TraceParseError(std::string("malformed trace line: ") + e.what());
            }
        }()));
        out.event_lines.push_back(line);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Replay

/// Runs the search exactly as the CLI does: engine loop, plus training-group
/// extraction (with its pad_rollout events) in group_collect mode.
struct FullRun {
    RunResult result;
    std::optional<TrainingGroup> group;
};

inline FullRun run_full(const tasks::TaskBundle& task, const EngineConfig& cfg) {
    FullRun fr{bes::run(task, cfg), std::nullopt};
    if (cfg.mode == RunMode::group_collect) {
        RngStream pad_rng = RngStream::derive(cfg.rng_seed, 2);
        fr.group = extract_training_group(fr.result.pool, fr.result.tree, cfg.group_target, task,
                                          cfg.max_rollout_len, pad_rng, &fr.result.events,
                                          fr.result.policy_calls, fr.result.forward_steps);
    }
    return fr;
}

enum class ReplayStatus : int { ok = 0, parse_error = 2, diverged = 4 };

struct ReplayReport {
    ReplayStatus status = ReplayStatus::ok;
    std::int64_t diverged_step = -1; ///< step index of the first mismatching event
    std::int64_t diverged_line = -1; ///< 1-based line number in the file
    std::string message;
};

/// Re-executes the run recorded in `path` and byte-compares every event line.
inline ReplayReport replay_file(const std::string& path) {
    ReplayReport rep;
    ParsedTrace recorded;
    EngineConfig cfg;
    std::unique_ptr<tasks::TaskBundle> task;
    try {
        recorded = parse_file(path);
        cfg = config_from_json(recorded.header.config);
        task = tasks::make_task(recorded.header.task);
    } catch (const std::exception& e) {
        rep.status = ReplayStatus::parse_error;
        rep.message = e.what();
        return rep;
    }

    const FullRun fr = run_full(*task, cfg);
    const auto& events = fr.result.events;
    const std::size_t n = std::min(events.size(), recorded.event_lines.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::string line = event_to_json(events[i]).dump();
        if (line != recorded.event_lines[i]) {
            rep.status = ReplayStatus::diverged;
            rep.diverged_step = recorded.events[i].step;
            rep.diverged_line = static_cast<std::int64_t>(i) + 2; // after the header line
            rep.message = "event mismatch";
            return rep;
        }
    }
    if (events.size() != recorded.event_lines.size()) {
        rep.status = ReplayStatus::diverged;
        rep.diverged_line = static_cast<std::int64_t>(n) + 2;
        rep.diverged_step = n < recorded.events.size() ? recorded.events[n].step
                            : n < events.size()        ? events[n].step
                                                       : -1;
        rep.message = events.size() < recorded.event_lines.size() ? "recorded trace has extra events"
                                                                  : "replay produced extra events";
    }
    return rep;
}

} // namespace bes::trace
