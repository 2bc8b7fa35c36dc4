#pragma once

// Shared test utilities.

#include <string>
#include <vector>

#include "bes/core.hpp"
#include "bes/rng.hpp"

namespace bes::test {

/// One step per character: traj_of("ab") == [Step{"a"}, Step{"b"}].
inline Trajectory traj_of(const std::string& symbols) {
    Trajectory t;
    for (char c : symbols) t.steps.push_back(Step{std::string(1, c)});
    return t;
}

inline std::string symbols_of(const Trajectory& t) {
    std::string s;
    for (const auto& st : t.steps) s += st.payload;
    return s;
}

/// All trajectories over `alphabet` with length <= max_len, shortest first.
inline std::vector<Trajectory> all_trajectories(const std::string& alphabet,
                                                std::size_t max_len) {
    std::vector<std::string> frontier = {""};
    std::vector<Trajectory> out = {traj_of("")};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<std::string> next;
        for (const auto& prefix : frontier)
            for (char c : alphabet) {
                next.push_back(prefix + c);
                out.push_back(traj_of(next.back()));
            }
        frontier = std::move(next);
    }
    return out;
}

inline Trajectory random_traj(const std::string& alphabet, std::size_t max_len, RngStream& rng) {
    const std::size_t len = rng.uniform_index(max_len + 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.uniform_index(alphabet.size())];
    return traj_of(s);
}

/// Per-symbol multiset count over a 1-char-payload trajectory.
inline std::vector<int> symbol_counts(const Trajectory& t) {
    std::vector<int> counts(256, 0);
    for (const auto& s : t.steps) counts[static_cast<unsigned char>(s.payload[0])] += 1;
    return counts;
}

} // namespace bes::test
