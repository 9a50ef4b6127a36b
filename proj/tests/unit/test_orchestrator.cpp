#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "mfc/orchestrator.hpp"
#include "mfc/qnetwork.hpp"

using namespace mfc;

namespace {

ExperimentConfig tiny(Architecture arch) {
    ExperimentConfig c;
    c.height = 4;
    c.width = 4;
    c.population = 6;
    c.architecture = arch;
    c.game = GameKind::Disperse;
    c.loops.iterations = 3;
    c.loops.collect_steps = 4;
    c.loops.learn_steps = 3;
    c.loops.eval_steps = 3;
    c.loops.policy_rounds = 2;
    c.learn.target_sync_every = 2;
    c.hidden_width = 8;
    c.seed = 11;
    return c;
}

} // namespace

TEST_CASE("defaults and presets") {
    const ExperimentConfig d = default_config();
    CHECK(d.height == 20);
    CHECK(d.width == 20);
    CHECK(d.population == 500);
    CHECK(d.loops.iterations == 150);
    CHECK(d.loops.collect_steps == 20);
    CHECK(d.loops.learn_steps == 20);
    CHECK(d.loops.eval_steps == 20);
    CHECK(d.loops.policy_rounds == 1);
    CHECK(d.loops.reward_rounds == 1);
    CHECK(d.loops.mean_field_rounds == 1);
    CHECK(d.learn.gamma == 0.9);
    CHECK(d.learn.tau_q == 0.03);
    CHECK(d.learn.batch_size == 32);
    CHECK(d.learn.clip == -1.0);
    CHECK(d.learn.target_sync_every == 19);
    CHECK(d.learn.learning_rate == 0.01);
    CHECK(d.net_shape() == NetShape{440, 256, 256, 5});

    const ExperimentConfig desk = desk_config();
    CHECK(desk.height == 10);
    CHECK(desk.population == 50);
    CHECK(desk.loops.iterations == 50);
    CHECK(desk.net_shape() == NetShape{120, 64, 64, 5});
}

TEST_CASE("config validation") {
    ExperimentConfig c = tiny(Architecture::Networked);
    CHECK_NOTHROW(c.validate());
    c.ablations.individual_reward_only = true;
    c.ablations.oracle_average_reward = true;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = tiny(Architecture::Networked);
    c.learn.gamma = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = tiny(Architecture::Networked);
    c.learn.clip = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = tiny(Architecture::Networked);
    c.loops.reward_rounds = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = tiny(Architecture::Networked);
    c.radii.link_failure_prob = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK_THROWS_AS(run_training(c), std::invalid_argument);
}

TEST_CASE("learners and reward signals") {
    CHECK(which_learners(Architecture::CentralAgent, 500) == std::vector<int>{0});
    CHECK(which_learners(Architecture::Networked, 3) == std::vector<int>{0, 1, 2});
    CHECK(which_learners(Architecture::Independent, 1) == std::vector<int>{0});

    const Ablations none;
    CHECK(resolve_reward_signal(Architecture::CentralAgent, none, 0.1, 0.2, 0.3) == 0.3);
    CHECK(resolve_reward_signal(Architecture::Networked, none, 0.1, 0.2, 0.3) == 0.2);
    Ablations own;
    own.individual_reward_only = true;
    CHECK(resolve_reward_signal(Architecture::Networked, own, 0.1, 0.2, 0.3) == 0.1);
    Ablations oracle;
    oracle.oracle_average_reward = true;
    CHECK(resolve_reward_signal(Architecture::Networked, oracle, 0.1, 0.2, 0.3) == 0.3);
}

TEST_CASE("non-episodic clock") {
    for (Architecture arch : {Architecture::Networked, Architecture::CentralAgent, Architecture::Independent}) {
        const ExperimentConfig c = tiny(arch);
        const TrainingResult res = run_training(c);
        const long per_k = arch == Architecture::Networked ? 4 + 3 + 2 : 4;
        CHECK(expected_final_time(c) == 3 * per_k);
        CHECK(res.final_t == expected_final_time(c));
        REQUIRE(res.rows.size() == 3);
        long prev = 0;
        for (const auto& row : res.rows) {
            CHECK(row.t == (row.k + 1) * per_k);
            CHECK(row.t > prev);
            prev = row.t;
        }
    }
}

TEST_CASE("metrics stay within the discounted bound") {
    for (GameKind game : kAllGames) {
        ExperimentConfig c = tiny(Architecture::Networked);
        c.game = game;
        const double bound = (1.0 - std::pow(c.learn.gamma, c.loops.collect_steps)) / (1.0 - c.learn.gamma);
        for (const auto& row : run_training(c).rows) {
            CHECK(row.v_pop_hat >= 0.0);
            CHECK(row.v_pop_hat <= bound + 1e-12);
        }
    }
}

TEST_CASE("single step run") {
    ExperimentConfig c = tiny(Architecture::Networked);
    c.height = 1;
    c.width = 1;
    c.game = GameKind::Cluster;
    c.loops.iterations = 1;
    c.loops.collect_steps = 1;
    c.loops.learn_steps = 0;
    c.loops.policy_rounds = 0;
    const TrainingResult res = run_training(c);
    REQUIRE(res.rows.size() == 1);
    CHECK(res.rows[0].v_pop_hat == 1.0);
    CHECK(res.final_t == 1 + c.loops.eval_steps);
}

TEST_CASE("central agent pushes identical parameters") {
    const TrainingResult res = run_training(tiny(Architecture::CentralAgent));
    for (const auto& p : res.policies) {
        CHECK(p == res.policies[0]);
    }

    ExperimentConfig lossy = tiny(Architecture::CentralAgent);
    lossy.radii.link_failure_prob = 1.0;
    const TrainingResult stale = run_training(lossy);
    for (std::size_t i = 1; i < stale.policies.size(); ++i) {
        CHECK_FALSE(stale.policies[i] == stale.policies[0]);
    }
}

TEST_CASE("runs are deterministic across worker counts") {
    for (Architecture arch : {Architecture::Networked, Architecture::CentralAgent, Architecture::Independent}) {
        ExperimentConfig c = tiny(arch);
        c.radii = {0.4, 0.4, 0.3};
        const TrainingResult a = run_training(c);
        const TrainingResult b = run_training(c);
        c.workers = 3;
        const TrainingResult m = run_training(c);
        REQUIRE(a.rows.size() == b.rows.size());
        for (std::size_t k = 0; k < a.rows.size(); ++k) {
            CHECK(a.rows[k].v_pop_hat == b.rows[k].v_pop_hat);
            CHECK(a.rows[k].v_pop_hat == m.rows[k].v_pop_hat);
            CHECK(a.rows[k].t == m.rows[k].t);
        }
        for (std::size_t i = 0; i < a.policies.size(); ++i) {
            CHECK(a.policies[i] == m.policies[i]);
        }
    }
}

TEST_CASE("seeds change the run") {
    ExperimentConfig c = tiny(Architecture::Independent);
    const TrainingResult a = run_training(c);
    c.seed = 12;
    const TrainingResult b = run_training(c);
    CHECK_FALSE(a.policies[0] == b.policies[0]);
}

TEST_CASE("ablations run") {
    ExperimentConfig c = tiny(Architecture::Networked);
    c.ablations.population_independent_obs = true;
    CHECK(run_training(c).rows.size() == 3);
    c = tiny(Architecture::Networked);
    c.ablations.oracle_mean_field = true;
    c.ablations.oracle_average_reward = true;
    c.ablations.fixed_tau_comm = 1e-18;
    CHECK(run_training(c).rows.size() == 3);
    c = tiny(Architecture::Networked);
    c.ablations.individual_reward_only = true;
    CHECK(run_training(c).rows.size() == 3);
}

TEST_CASE("row hook and checkpoints") {
    const auto dir = std::filesystem::temp_directory_path() / "mfc_ckpt_test";
    std::filesystem::remove_all(dir);
    ExperimentConfig c = tiny(Architecture::Independent);
    c.checkpoint_every = 2;
    c.checkpoint_dir = dir;
    int seen = 0;
    RunHooks hooks;
    hooks.on_row = [&](const MetricsRow& row) { CHECK(row.k == seen++); };
    const TrainingResult res = run_training(c, hooks);
    CHECK(seen == 3);
    int files = 0;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        files += entry.is_regular_file();
    }
    CHECK(files > 0);
    std::filesystem::remove_all(dir);
}
