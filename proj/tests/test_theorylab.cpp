#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bes/theorylab.hpp"

using namespace bes;
using namespace bes::theory;
using tasks::MarkovPolicyTask;

namespace {

MarkovPolicyTask symmetric_chain(std::size_t T, double stay) {
    return MarkovPolicyTask(2, T, {{stay, 1 - stay}, {1 - stay, stay}});
}

MarkovPolicyTask random_chain(std::size_t A, std::size_t T, RngStream& rng) {
    std::vector<std::vector<double>> rows(A, std::vector<double>(A));
    for (auto& row : rows) {
        double sum = 0;
        for (double& v : row) sum += (v = 0.05 + rng.uniform01());
        for (double& v : row) v /= sum;
    }
    std::vector<double> init(A);
    double sum = 0;
    for (double& v : init) sum += (v = 0.05 + rng.uniform01());
    for (double& v : init) v /= sum;
    return MarkovPolicyTask(A, T, std::move(rows), std::move(init));
}

} // namespace

TEST_CASE("exact trajectory entropy closed forms") {
    SECTION("uniform i.i.d. policy: T log A") {
        for (std::size_t A : {2, 3, 4})
            for (std::size_t T : {1, 5, 16}) {
                const auto task = MarkovPolicyTask::iid(T, std::vector<double>(A, 1.0 / A));
                CHECK(exact_trajectory_entropy(task, T) ==
                      Catch::Approx(T * std::log(static_cast<double>(A))).epsilon(1e-12));
            }
    }
    SECTION("near-deterministic chain: entropy concentrates in the initial symbol") {
        const double eps = 1e-12;
        const MarkovPolicyTask task(2, 32, {{1 - eps, eps}, {eps, 1 - eps}});
        const double h = exact_trajectory_entropy(task, 32);
        CHECK(h == Catch::Approx(std::log(2.0)).margin(1e-6));
    }
    SECTION("hand chain rule on the (0.9,0.1) chain at T=2") {
        const auto task = symmetric_chain(2, 0.9);
        const double h_row = -(0.9 * std::log(0.9) + 0.1 * std::log(0.1)); // 0.3251
        const double want = std::log(2.0) + h_row;                         // 1.0183
        CHECK(exact_trajectory_entropy(task, 2) == Catch::Approx(want).epsilon(1e-12));
        CHECK(want == Catch::Approx(1.0183).margin(5e-4));
        CHECK(exhaustive::trajectory_entropy(task, 2) == Catch::Approx(want).epsilon(1e-12));
    }
    SECTION("agrees with exhaustive enumeration for A <= 3, T <= 10") {
        RngStream rng(61);
        for (int it = 0; it < 30; ++it) {
            const std::size_t A = 2 + rng.uniform_index(2);
            const std::size_t T = 1 + rng.uniform_index(10);
            const auto task = random_chain(A, T, rng);
            CHECK(std::abs(exact_trajectory_entropy(task, T) -
                           exhaustive::trajectory_entropy(task, T)) < 1e-10);
        }
    }
    SECTION("caps raise TooLarge") {
        const auto task = symmetric_chain(8, 0.9);
        CHECK_THROWS_AS(exact_trajectory_entropy(task, 65), TooLarge);
    }
}

TEST_CASE("exact block total correlation") {
    SECTION("i.i.d. policy: zero for any boundaries") {
        const auto task = MarkovPolicyTask::iid(12, {0.7, 0.3});
        CHECK(std::abs(exact_block_total_correlation(task, equal_blocks(12, 2))) < 1e-12);
        CHECK(std::abs(exact_block_total_correlation(task, equal_blocks(12, 4))) < 1e-12);
    }
    SECTION("two blocks: closed form equals exhaustive mutual information") {
        const auto task = symmetric_chain(8, 0.9);
        const auto boundaries = equal_blocks(8, 2);
        const double closed = exact_block_total_correlation(task, boundaries);
        const double exhaustive_tc = exhaustive::block_total_correlation(task, boundaries);
        CHECK(closed == Catch::Approx(exhaustive_tc).margin(1e-10));
        CHECK(closed > 0.0);
    }
    SECTION("multi-block closed form matches exhaustive") {
        RngStream rng(62);
        for (int it = 0; it < 10; ++it) {
            const auto task = random_chain(2, 8, rng);
            const auto boundaries = equal_blocks(8, 4);
            CHECK(std::abs(exact_block_total_correlation(task, boundaries) -
                           exhaustive::block_total_correlation(task, boundaries)) < 1e-10);
        }
    }
    SECTION("stronger coupling gives larger TC at equal horizon") {
        const double tc_strong =
            exact_block_total_correlation(symmetric_chain(8, 0.99), equal_blocks(8, 2));
        const double tc_weak =
            exact_block_total_correlation(symmetric_chain(8, 0.6), equal_blocks(8, 2));
        CHECK(tc_strong > tc_weak);
        CHECK(tc_weak > 0.0);
    }
    SECTION("bad boundaries are rejected") {
        const auto task = symmetric_chain(8, 0.9);
        CHECK_THROWS_AS(exact_block_total_correlation(task, {0, 8}), std::invalid_argument);
        CHECK_THROWS_AS(exact_block_total_correlation(task, {0, 4, 4, 8}), std::invalid_argument);
    }
}

TEST_CASE("shell experiment: correlated chain escapes, i.i.d. control does not") {
    SECTION("correlated 2-state chain") {
        ShellExperimentConfig cfg;
        cfg.n_samples = 20000;
        cfg.seed = 7;
        const auto rep = shell_experiment(cfg);
        REQUIRE(rep.rows.size() == 3);
        for (const auto& r : rep.rows) {
            CHECK(r.evolution_mean_surprise >= r.H_T + r.TC - 3 * r.evolution_se);
            CHECK(r.TC > 0.0);
        }
        // escape rate decays monotonically over the three horizons
        for (std::size_t i = 1; i < rep.rows.size(); ++i)
            CHECK(rep.rows[i].escape_rate < rep.rows[i - 1].escape_rate);
    }
    SECTION("i.i.d. control: TC = 0 and the surprise gap vanishes") {
        ShellExperimentConfig cfg;
        cfg.transitions = {{0.7, 0.3}, {0.7, 0.3}};
        cfg.n_samples = 20000;
        cfg.seed = 11;
        const auto rep = shell_experiment(cfg);
        for (const auto& r : rep.rows) {
            CHECK(std::abs(r.TC) < 1e-12);
            CHECK(std::abs(r.evolution_mean_surprise - r.H_T) <= 3 * r.evolution_se);
        }
    }
    SECTION("escape-fraction bound where epsilon < TC/T (k=8 blocks, T=16)") {
        ShellExperimentConfig cfg;
        cfg.k_blocks = 8;
        cfg.horizons = {16};
        cfg.n_samples = 20000;
        cfg.seed = 13;
        const auto rep = shell_experiment(cfg);
        const auto& r = rep.rows[0];
        REQUIRE(r.eq7_applicable);
        CHECK(r.eq7_bound < 1.0);
        CHECK(r.evolution_in_shell <= r.eq7_bound + 3 * r.evolution_in_shell_se);
    }
    SECTION("config validation") {
        ShellExperimentConfig bad;
        bad.k_blocks = 1;
        CHECK_THROWS_AS(shell_experiment(bad), std::invalid_argument);
    }
}

TEST_CASE("subgoal experiment reproduces the sample-complexity gap") {
    SECTION("m=1: both criteria coincide at 1/p") {
        SubgoalExperimentConfig cfg;
        cfg.m = 1;
        cfg.p = 0.5;
        cfg.trials = 4000;
        cfg.seed = 3;
        const auto rep = subgoal_experiment(cfg);
        CHECK(rep.n_term_hat == Catch::Approx(2.0).margin(3 * rep.n_term_se + 1e-9));
        // the coverage (1-delta)-quantile of a geometric(1/2): around 3-4 draws
        CHECK(rep.n_bidir_hat >= 1.0);
        CHECK(rep.n_bidir_hat <= rep.union_bound + 1.0);
    }
    SECTION("m=4, p=0.5, delta=0.1 matches the worked numbers") {
        SubgoalExperimentConfig cfg;
        cfg.seed = 5;
        const auto rep = subgoal_experiment(cfg);
        CHECK(rep.n_term_hat == Catch::Approx(16.0).epsilon(0.10)); // geometric mean 1/p^m
        CHECK(rep.n_bidir_hat <= rep.union_bound);                  // 7.378
        CHECK(rep.ratio > 2.0);
    }
    SECTION("the ratio grows strictly with m") {
        double prev = 0.0;
        for (std::size_t m : {2, 3, 4, 5}) {
            SubgoalExperimentConfig cfg;
            cfg.m = m;
            cfg.seed = 17;
            const auto rep = subgoal_experiment(cfg);
            CHECK(rep.ratio > prev);
            prev = rep.ratio;
        }
    }
    SECTION("config validation") {
        SubgoalExperimentConfig bad;
        bad.p = 1.5;
        CHECK_THROWS_AS(subgoal_experiment(bad), std::invalid_argument);
    }
}

TEST_CASE("experiment reports serialize to JSON and CSV") {
    SubgoalExperimentConfig cfg;
    cfg.trials = 200;
    const auto rep = subgoal_experiment(cfg);
    const auto j = to_json(rep);
    CHECK(j.at("experiment") == "subgoals");
    CHECK(j.at("ratio").get<double>() == rep.ratio);
    const std::string csv = to_csv(rep);
    CHECK(csv.substr(0, 2) == "m,");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

    ShellExperimentConfig scfg;
    scfg.n_samples = 500;
    scfg.horizons = {8};
    const auto srep = shell_experiment(scfg);
    const auto sj = to_json(srep);
    CHECK(sj.at("rows").size() == 1);
    const std::string scsv = to_csv(srep);
    CHECK(scsv.substr(0, 2) == "T,");
}
