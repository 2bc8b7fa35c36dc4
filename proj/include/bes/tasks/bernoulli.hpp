#pragma once

// Bernoulli sub-goal task: m independent leaf sub-goals, one step per
// attempt. A step "g<i>:<bit>" records whether attempt i satisfied sub-goal
// i; a fresh rollout draws the bits independently with probabilities p_i.
// Steps are tagged with their sub-goal index, so transplanting a single step
// transplants exactly one sub-goal's satisfaction.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bes/tasks/base.hpp"

namespace bes::tasks {

class BernoulliSubgoalTask final : public TaskBundle {
  public:
    BernoulliSubgoalTask(std::size_t m, std::vector<double> p) : p_(std::move(p)) {
        if (p_.size() == 1 && m > 1) p_.assign(m, p_[0]);
        if (p_.size() != m || m == 0)
            throw std::invalid_argument("bernoulli task: need one probability per sub-goal");
        for (double pi : p_)
            if (!(pi > 0.0 && pi < 1.0))
                throw std::invalid_argument("bernoulli task: probabilities must be in (0,1)");
    }

    std::string name() const override { return "bernoulli"; }
    std::size_t subgoals() const { return p_.size(); }

    static std::string step_payload(std::size_t index, bool satisfied) {
        return "g" + std::to_string(index) + ":" + (satisfied ? "1" : "0");
    }

    std::optional<Step> next_step(const Trajectory& prefix, RngStream& rng) const override {
        const auto missing = first_missing(prefix);
        if (!missing) return std::nullopt;
        return Step{step_payload(*missing, rng.bernoulli(p_[*missing]))};
    }

    bool is_terminal(const Trajectory& t) const override { return !first_missing(t).has_value(); }

    GoalTreeState initial_tree() const override {
        const std::size_t m = p_.size();
        return GoalTreeState::make_root("satisfy all " + std::to_string(m) + " sub-goals",
                                        range_verifier(0, m), range_key(0, m));
    }

    /// Splits a contiguous index range in half; singleton ranges are atomic.
    std::vector<GoalSpec> decompose(const Goal& leaf, RngStream&) const override {
        std::size_t lo = 0, hi = 0;
        if (!parse_range_key(leaf.decompose_key, lo, hi) || hi - lo < 2) return {};
        const std::size_t mid = lo + (hi - lo) / 2;
        std::vector<GoalSpec> out;
        for (auto [a, b] : {std::pair{lo, mid}, std::pair{mid, hi}}) {
            GoalSpec g;
            g.description = b - a == 1 ? "satisfy sub-goal " + std::to_string(a)
                                       : "satisfy sub-goals [" + std::to_string(a) + "," +
                                             std::to_string(b) + ")";
            g.verifier = range_verifier(a, b);
            g.decomposable = b - a >= 2;
            g.decompose_key = range_key(a, b);
            out.push_back(std::move(g));
        }
        return out;
    }

    std::optional<std::vector<Step>> enumerate_steps(const Trajectory& prefix) const override {
        std::vector<Step> out;
        if (const auto missing = first_missing(prefix)) {
            out.push_back(Step{step_payload(*missing, false)});
            out.push_back(Step{step_payload(*missing, true)});
        }
        return out;
    }

    nlohmann::ordered_json spec_json() const override {
        return {{"name", "bernoulli"}, {"m", p_.size()}, {"p", p_}};
    }

  private:
    std::vector<double> p_;

    static std::optional<std::pair<std::size_t, bool>> parse_step(const std::string& payload) {
        if (payload.size() < 4 || payload[0] != 'g') return std::nullopt;
        const auto colon = payload.find(':');
        if (colon == std::string::npos || colon + 2 != payload.size()) return std::nullopt;
        const char bit = payload[colon + 1];
        if (bit != '0' && bit != '1') return std::nullopt;
        std::size_t idx = 0;
        for (std::size_t i = 1; i < colon; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(payload[i]))) return std::nullopt;
            idx = idx * 10 + static_cast<std::size_t>(payload[i] - '0');
        }
        return std::make_pair(idx, bit == '1');
    }

    std::optional<std::size_t> first_missing(const Trajectory& t) const {
        std::vector<bool> present(p_.size(), false);
        for (const auto& s : t.steps)
            if (const auto ps = parse_step(s.payload); ps && ps->first < p_.size())
                present[ps->first] = true;
        for (std::size_t i = 0; i < p_.size(); ++i)
            if (!present[i]) return i;
        return std::nullopt;
    }

    static std::string range_key(std::size_t lo, std::size_t hi) {
        return std::to_string(lo) + ":" + std::to_string(hi);
    }

    static bool parse_range_key(const std::string& key, std::size_t& lo, std::size_t& hi) {
        const auto colon = key.find(':');
        if (colon == std::string::npos) return false;
        lo = std::stoull(key.substr(0, colon));
        hi = std::stoull(key.substr(colon + 1));
        return hi > lo;
    }

    /// Fraction of sub-goals in [lo,hi) satisfied somewhere in the trajectory.
    static VerifierFn range_verifier(std::size_t lo, std::size_t hi) {
        return [lo, hi](const Trajectory& t) {
            std::vector<bool> sat(hi - lo, false);
            for (const auto& s : t.steps)
                if (const auto ps = parse_step(s.payload); ps && ps->second && ps->first >= lo &&
                                                           ps->first < hi)
                    sat[ps->first - lo] = true;
            std::size_t n = 0;
            for (bool b : sat) n += b ? 1 : 0;
            return static_cast<double>(n) / static_cast<double>(hi - lo);
        };
    }
};

} // namespace bes::tasks
