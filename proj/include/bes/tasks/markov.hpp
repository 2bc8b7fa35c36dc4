#pragma once

// Order-1 Markov policy task over a small alphabet, horizon T. Every
// transition probability is strictly positive, so per-step surprise is
// bounded. The task exists mainly for the theory lab: trajectory
// log-probabilities, entropies and block total correlations are all exactly
// computable from the matrices.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bes/tasks/base.hpp"

namespace bes::tasks {

class MarkovPolicyTask final : public TaskBundle {
  public:
    /// `rows` is the A x A transition matrix (row-stochastic, full support);
    /// `init` the start distribution (defaults to uniform).
    MarkovPolicyTask(std::size_t alphabet, std::size_t horizon, std::vector<std::vector<double>> rows,
                     std::vector<double> init = {})
        : A_(alphabet), T_(horizon), rows_(std::move(rows)), init_(std::move(init)) {
        if (A_ == 0 || T_ == 0) throw std::invalid_argument("markov task: empty alphabet or horizon");
        if (init_.empty()) init_.assign(A_, 1.0 / static_cast<double>(A_));
        if (rows_.size() != A_ || init_.size() != A_)
            throw std::invalid_argument("markov task: matrix shape mismatch");
        for (const auto& row : rows_) {
            if (row.size() != A_) throw std::invalid_argument("markov task: matrix shape mismatch");
            double sum = 0.0;
            for (double v : row) {
                if (!(v > 0.0)) throw std::invalid_argument("markov task: transitions need full support");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("markov task: rows must sum to 1");
        }
        double isum = 0.0;
        for (double v : init_) {
            if (!(v > 0.0)) throw std::invalid_argument("markov task: init needs full support");
            isum += v;
        }
        if (std::abs(isum - 1.0) > 1e-9)
            throw std::invalid_argument("markov task: init must sum to 1");
    }

    /// Chain whose every row (and init) equals `dist`: steps are i.i.d.
    static MarkovPolicyTask iid(std::size_t horizon, std::vector<double> dist) {
        const std::size_t alphabet = dist.size();
        std::vector<std::vector<double>> rows(alphabet, dist);
        return MarkovPolicyTask(alphabet, horizon, std::move(rows), std::move(dist));
    }

    std::string name() const override { return "markov"; }

    std::size_t alphabet() const { return A_; }
    std::size_t horizon() const { return T_; }
    const std::vector<std::vector<double>>& transitions() const { return rows_; }
    const std::vector<double>& init() const { return init_; }

    std::optional<Step> next_step(const Trajectory& prefix, RngStream& rng) const override {
        const auto& dist = prefix.empty() ? init_ : rows_[symbol_of(prefix.steps.back())];
        return Step{std::to_string(rng.categorical(dist))};
    }

    bool is_terminal(const Trajectory& t) const override { return t.size() >= T_; }

    GoalTreeState initial_tree() const override {
        const std::size_t horizon = T_;
        VerifierFn v = [horizon](const Trajectory& t) {
            return std::min(1.0, static_cast<double>(t.size()) / static_cast<double>(horizon));
        };
        return GoalTreeState::make_root("emit a full horizon-" + std::to_string(T_) + " trajectory",
                                        std::move(v));
    }

    std::vector<GoalSpec> decompose(const Goal&, RngStream&) const override { return {}; }

    std::optional<std::vector<Step>> enumerate_steps(const Trajectory& prefix) const override {
        std::vector<Step> out;
        if (prefix.size() < T_)
            for (std::size_t s = 0; s < A_; ++s) out.push_back(Step{std::to_string(s)});
        return out;
    }

    /// Exact log-probability of a (possibly partial) trajectory under the chain.
    double log_prob(const Trajectory& t) const {
        double lp = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) {
            const std::size_t sym = symbol_of(t.steps[k]);
            lp += std::log(k == 0 ? init_[sym] : rows_[symbol_of(t.steps[k - 1])][sym]);
        }
        return lp;
    }

    /// Supremum of per-step surprise: max over init and transition entries of -log p.
    double surprise_bound() const {
        double min_p = std::numeric_limits<double>::infinity();
        for (double v : init_) min_p = std::min(min_p, v);
        for (const auto& row : rows_)
            for (double v : row) min_p = std::min(min_p, v);
        return -std::log(min_p);
    }

    Trajectory rollout(RngStream& rng) const {
        Trajectory t;
        t.steps.reserve(T_);
        while (!is_terminal(t)) t.steps.push_back(*next_step(t, rng));
        t.terminal = true;
        return t;
    }

    static std::size_t symbol_of(const Step& s) {
        return static_cast<std::size_t>(std::stoull(s.payload));
    }

    nlohmann::ordered_json spec_json() const override {
        return {{"name", "markov"},
                {"alphabet", A_},
                {"horizon", T_},
                {"transitions", rows_},
                {"init", init_}};
    }

  private:
    std::size_t A_;
    std::size_t T_;
    std::vector<std::vector<double>> rows_;
    std::vector<double> init_;
};

} // namespace bes::tasks
