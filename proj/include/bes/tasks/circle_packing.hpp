#pragma once

// Circle packing in the unit square, encoded as an editable step sequence so
// trajectory splicing is meaningful: place(x,y,r) appends a circle,
// adjust(i,dx,dy,dr) nudges an existing one, finalize freezes the candidate.
// A partial trajectory decodes to the circles placed so far.
//
// The root verifier scores sum-of-radii against a configured reference value
// and penalizes any overlap or boundary violation below every clean layout.
// Local sub-goal verifiers return dense partial credit min(1, actual/target).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "bes/tasks/base.hpp"

namespace bes::tasks {

struct Circle {
    double x = 0, y = 0, r = 0;
};

struct CirclePackingConfig {
    std::size_t n_circles = 8;
    double reference_sum = 1.0;     ///< sum of radii that scores 1.0
    double radius_threshold = 0.08; ///< "large circle" cutoff for the count sub-goal
    std::size_t radius_count = 3;   ///< target number of large circles
    std::size_t tangent_target = 2; ///< target tangent pairs
    std::size_t boundary_target = 3;///< target wall contacts
    double contact_tol = 0.02;      ///< tangency / wall-contact tolerance
};

class CirclePackingTask final : public TaskBundle {
  public:
    explicit CirclePackingTask(CirclePackingConfig cfg = {}) : cfg_(cfg) {
        if (cfg_.n_circles == 0) throw std::invalid_argument("circle task: n_circles must be >= 1");
        if (!(cfg_.reference_sum > 0.0))
            throw std::invalid_argument("circle task: reference_sum must be > 0");
    }

    std::string name() const override { return "circle_packing"; }
    const CirclePackingConfig& config() const { return cfg_; }

    struct Decoded {
        std::vector<Circle> circles;
        bool finalized = false;
    };

    static std::string place_step(double x, double y, double r) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "place(%.6f,%.6f,%.6f)", x, y, r);
        return buf;
    }

    static std::string adjust_step(std::size_t i, double dx, double dy, double dr) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "adjust(%zu,%.6f,%.6f,%.6f)", i, dx, dy, dr);
        return buf;
    }

    /// Applies steps in order; decoding stops at the first finalize. Radii
    /// are clamped to >= 0, malformed or out-of-range edits are ignored.
    Decoded decode(const Trajectory& t) const {
        Decoded d;
        for (const auto& s : t.steps) {
            const std::string& p = s.payload;
            if (p == "finalize") {
                d.finalized = true;
                break;
            }
            double a = 0, b = 0, c = 0;
            unsigned long idx = 0;
            if (std::sscanf(p.c_str(), "place(%lf,%lf,%lf)", &a, &b, &c) == 3) {
                if (d.circles.size() < cfg_.n_circles)
                    d.circles.push_back({a, b, std::max(0.0, c)});
            } else if (std::sscanf(p.c_str(), "adjust(%lu,%lf,%lf,%lf)", &idx, &a, &b, &c) == 4) {
                if (!d.circles.empty()) {
                    Circle& tgt = d.circles[idx % d.circles.size()];
                    tgt.x += a;
                    tgt.y += b;
                    tgt.r = std::max(0.0, tgt.r + c);
                }
            }
        }
        return d;
    }

    static bool valid(const std::vector<Circle>& cs) {
        constexpr double eps = 1e-9;
        for (const auto& c : cs)
            if (c.x - c.r < -eps || c.x + c.r > 1 + eps || c.y - c.r < -eps || c.y + c.r > 1 + eps)
                return false;
        for (std::size_t i = 0; i < cs.size(); ++i)
            for (std::size_t j = i + 1; j < cs.size(); ++j) {
                const double dx = cs[i].x - cs[j].x, dy = cs[i].y - cs[j].y;
                if (std::sqrt(dx * dx + dy * dy) < cs[i].r + cs[j].r - eps) return false;
            }
        return true;
    }

    static double sum_radii(const std::vector<Circle>& cs) {
        double s = 0;
        for (const auto& c : cs) s += c.r;
        return s;
    }

    std::optional<Step> next_step(const Trajectory& prefix, RngStream& rng) const override {
        const Decoded d = decode(prefix);
        if (d.finalized) return std::nullopt;
        if (d.circles.size() >= cfg_.n_circles) return Step{"finalize"};
        if (!d.circles.empty() && rng.bernoulli(0.25)) {
            const std::size_t i = rng.uniform_index(d.circles.size());
            return Step{adjust_step(i, (rng.uniform01() - 0.5) * 0.1, (rng.uniform01() - 0.5) * 0.1,
                                    (rng.uniform01() - 0.5) * 0.04)};
        }
        const double r = 0.02 + rng.uniform01() * 0.10;
        const double x = r + rng.uniform01() * (1 - 2 * r);
        const double y = r + rng.uniform01() * (1 - 2 * r);
        return Step{place_step(x, y, r)};
    }

    bool is_terminal(const Trajectory& t) const override { return decode(t).finalized; }

    double raw_score(const Trajectory& t) const {
        const Decoded d = decode(t);
        if (d.circles.empty()) return 0.0;
        double base = std::min(1.0, sum_radii(d.circles) / cfg_.reference_sum);
        if (!valid(d.circles)) base *= 0.3;
        if (!d.finalized) base = std::min(base, 1.0 - 1e-6);
        return base;
    }

    std::optional<double> raw_objective(const Trajectory& t) const override {
        const Decoded d = decode(t);
        return valid(d.circles) ? sum_radii(d.circles) : 0.0;
    }

    GoalTreeState initial_tree() const override {
        const CirclePackingTask self = *this; // cheap copy, keeps verifier self-contained
        return GoalTreeState::make_root(
            "pack " + std::to_string(cfg_.n_circles) + " circles, sum of radii >= " +
                std::to_string(cfg_.reference_sum),
            [self](const Trajectory& t) { return self.raw_score(t); }, "root");
    }

    /// Dense structural sub-goals: large-radius count, tangent pairs, wall
    /// contacts. `level` scales the targets up for refined children.
    std::vector<GoalSpec> local_verifier_goals(std::uint32_t level) const {
        const CirclePackingTask self = *this;
        const double rt = cfg_.radius_threshold * (1.0 + 0.25 * level);
        const std::size_t kc = cfg_.radius_count + level;
        const std::size_t tt = cfg_.tangent_target + level;
        const std::size_t bt = cfg_.boundary_target + level;
        const bool more = level == 0;

        std::vector<GoalSpec> out(3);
        out[0].description = "at least " + std::to_string(kc) + " circles with radius >= " +
                             std::to_string(rt);
        out[0].verifier = [self, rt, kc](const Trajectory& t) {
            std::size_t n = 0;
            for (const auto& c : self.decode(t).circles) n += c.r >= rt ? 1 : 0;
            return std::min(1.0, static_cast<double>(n) / static_cast<double>(kc));
        };
        out[0].decompose_key = "radius:" + std::to_string(level);
        out[0].decomposable = more;

        out[1].description = "at least " + std::to_string(tt) + " tangent circle pairs";
        out[1].verifier = [self, tt](const Trajectory& t) {
            const auto cs = self.decode(t).circles;
            std::size_t n = 0;
            for (std::size_t i = 0; i < cs.size(); ++i)
                for (std::size_t j = i + 1; j < cs.size(); ++j) {
                    const double dx = cs[i].x - cs[j].x, dy = cs[i].y - cs[j].y;
                    if (std::abs(std::sqrt(dx * dx + dy * dy) - (cs[i].r + cs[j].r)) <=
                        self.cfg_.contact_tol)
                        ++n;
                }
            return std::min(1.0, static_cast<double>(n) / static_cast<double>(tt));
        };
        out[1].decompose_key = "tangent:" + std::to_string(level);
        out[1].decomposable = more;

        out[2].description = "at least " + std::to_string(bt) + " wall contacts";
        out[2].verifier = [self, bt](const Trajectory& t) {
            std::size_t n = 0;
            for (const auto& c : self.decode(t).circles) {
                const double gap = std::min(std::min(c.x - c.r, c.y - c.r),
                                            std::min(1 - c.x - c.r, 1 - c.y - c.r));
                if (std::abs(gap) <= self.cfg_.contact_tol) ++n;
            }
            return std::min(1.0, static_cast<double>(n) / static_cast<double>(bt));
        };
        out[2].decompose_key = "boundary:" + std::to_string(level);
        out[2].decomposable = more;
        return out;
    }

    std::vector<GoalSpec> decompose(const Goal& leaf, RngStream&) const override {
        if (leaf.decompose_key == "root") return local_verifier_goals(0);
        const auto colon = leaf.decompose_key.find(':');
        if (colon == std::string::npos) return {};
        const std::string kind = leaf.decompose_key.substr(0, colon);
        const std::uint32_t level = static_cast<std::uint32_t>(
            std::stoul(leaf.decompose_key.substr(colon + 1)));
        // refine one structural sub-goal into two stricter versions of itself
        auto all = local_verifier_goals(level + 1);
        std::vector<GoalSpec> out;
        for (auto& g : all)
            if (g.decompose_key.substr(0, colon) == kind) out.push_back(std::move(g));
        if (out.size() < 2) {
            auto harder = local_verifier_goals(level + 2);
            for (auto& g : harder)
                if (g.decompose_key.substr(0, g.decompose_key.find(':')) == kind)
                    out.push_back(std::move(g));
        }
        return out;
    }

    nlohmann::ordered_json spec_json() const override {
        return {{"name", "circle_packing"},
                {"n_circles", cfg_.n_circles},
                {"reference_sum", cfg_.reference_sum},
                {"radius_threshold", cfg_.radius_threshold},
                {"radius_count", cfg_.radius_count},
                {"tangent_target", cfg_.tangent_target},
                {"boundary_target", cfg_.boundary_target},
                {"contact_tol", cfg_.contact_tol}};
    }

  private:
    CirclePackingConfig cfg_;
};

/// The task's structural leaf verifiers at their base thresholds.
inline std::vector<GoalSpec> circle_packing_local_verifiers(const CirclePackingTask& task) {
    return task.local_verifier_goals(0);
}

} // namespace bes::tasks
