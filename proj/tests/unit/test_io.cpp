#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mfc/cli.hpp"
#include "mfc/metrics_io.hpp"
#include "mfc/sweep.hpp"

using namespace mfc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliOptions parse(std::vector<std::string> args) {
    args.insert(args.begin(), "mfcnet");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return parse_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

SweepSpec small_sweep(const fs::path& out) {
    SweepSpec spec;
    spec.base.height = 3;
    spec.base.width = 3;
    spec.base.population = 4;
    spec.base.loops = {2, 3, 2, 2, 1, 1, 1};
    spec.base.learn.target_sync_every = 1;
    spec.base.hidden_width = 4;
    spec.games = {GameKind::Disperse};
    spec.architectures = {Architecture::Networked, Architecture::Independent};
    spec.radii = {1.0};
    spec.seeds = {0, 1};
    spec.output_dir = out;
    return spec;
}

} // namespace

TEST_CASE("metrics CSV round trip") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<MetricsRow> rows;
    for (int k = 0; k < 50; ++k) {
        rows.push_back({k, 41L * (k + 1), u(gen), u(gen) * 1000});
    }
    const RunLabel label{GameKind::BeachBar, Architecture::Networked, 0.6, 4};
    for (bool wall : {false, true}) {
        std::stringstream io;
        write_metrics_header(io);
        write_metrics_rows(io, label, rows, wall);
        const auto back = read_metrics_csv(io);
        REQUIRE(back.size() == rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            CHECK(back[k].label == label);
            CHECK(back[k].k == rows[k].k);
            CHECK(back[k].t == rows[k].t);
            CHECK(back[k].v_pop_hat == rows[k].v_pop_hat);
            CHECK(back[k].wall_ms.has_value() == wall);
            if (wall) {
                CHECK(*back[k].wall_ms == rows[k].wall_ms);
            }
        }
    }
    std::istringstream bad(std::string(kMetricsHeader) + "\ncluster,networked,1,0,zero,1,0.5,\n");
    CHECK_THROWS_AS(read_metrics_csv(bad), std::runtime_error);
    std::istringstream headless("cluster,networked,1,0,0,1,0.5,\n");
    CHECK_THROWS_AS(read_metrics_csv(headless), std::runtime_error);
}

TEST_CASE("run labels") {
    ExperimentConfig c;
    c.radii.comm_radius_frac = 0.4;
    CHECK(label_for(c).radius == 0.4);
    c.architecture = Architecture::Independent;
    CHECK(label_for(c).radius == 0.0);
    c.architecture = Architecture::CentralAgent;
    CHECK(label_for(c).radius == 1.0);
}

TEST_CASE("command line defaults and presets") {
    const CliOptions plain = parse({});
    CHECK(plain.sweep.base.height == 20);
    CHECK(plain.sweep.base.population == 500);
    CHECK(plain.sweep.base.loops.iterations == 150);
    CHECK(plain.sweep.base.learn.target_sync_every == 19);
    CHECK(plain.sweep.games == std::vector<GameKind>{GameKind::Cluster});
    CHECK(plain.sweep.seeds == std::vector<std::uint64_t>{0});

    const CliOptions indep = parse({"--game", "cluster", "--arch", "independent"});
    CHECK(indep.sweep.architectures == std::vector<Architecture>{Architecture::Independent});
    const auto runs = plan_runs(indep.sweep);
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].config.architecture == Architecture::Independent);

    const CliOptions desk = parse({"--preset", "desk", "--seeds", "5"});
    CHECK(desk.sweep.base.height == 10);
    CHECK(desk.sweep.base.population == 50);
    CHECK(desk.sweep.base.loops.iterations == 50);
    CHECK(desk.sweep.seeds == std::vector<std::uint64_t>{0, 1, 2, 3, 4});

    const CliOptions over = parse({"--preset", "desk", "-n", "30", "-L", "10", "--comm-rounds", "3"});
    CHECK(over.sweep.base.population == 30);
    CHECK(over.sweep.base.learn.target_sync_every == 9);
    CHECK(over.sweep.base.loops.policy_rounds == 3);
    CHECK(over.sweep.base.loops.reward_rounds == 3);
    CHECK(over.sweep.base.loops.mean_field_rounds == 3);

    const CliOptions many = parse({"--game", "disperse,beach_bar", "--arch", "networked,central,independent",
                                   "--radius", "0.2,0.6", "--seed-list", "3,9"});
    // networked: 2 radii x 2 seeds, central and independent: 2 seeds each, per game
    CHECK(plan_runs(many.sweep).size() == 2 * (4 + 2 + 2));
}

TEST_CASE("command line errors") {
    auto code_of = [](std::vector<std::string> args) {
        try {
            parse(std::move(args));
        } catch (const CliError& e) {
            return e.exit_code();
        }
        return 0;
    };
    CHECK(code_of({"--bogus"}) == 2);
    CHECK(code_of({"--game", "chess"}) == 2);
    CHECK(code_of({"--arch", "anarchy"}) == 2);
    CHECK(code_of({"--radius", "1.5"}) == 2);
    CHECK(code_of({"--gamma", "1.0"}) == 2);
    CHECK(code_of({"--individual-reward-only", "--oracle-average-reward"}) == 2);
    CHECK(code_of({"--seed-list", "1,1"}) == 2);
    CHECK(code_of({"--seed", "1", "--seeds", "2"}) == 2);

    std::ostringstream out, err;
    const char* argv[] = {"mfcnet", "--bogus"};
    CHECK(run_cli(2, argv, out, err) == 2);
    CHECK_FALSE(err.str().empty());
}

TEST_CASE("dumped configuration reads back") {
    const fs::path dir = scratch("mfc_cli_dump");
    fs::create_directories(dir);
    const CliOptions first = parse({"--preset", "desk", "--game", "target_coverage,cluster", "--arch",
                                    "networked,central", "--radius", "0.2,1", "--seeds", "3", "--tau-q", "0.05",
                                    "--fixed-tau-comm", "1e-18", "--link-failure", "0.9", "--out", dir.string()});
    const std::string text = canonical_sweep_text(first.sweep);
    {
        std::ofstream f(dir / "run.toml");
        f << text;
    }
    const CliOptions second = parse({"--config", (dir / "run.toml").string()});
    CHECK(canonical_sweep_text(second.sweep) == text);
    CHECK(second.sweep.base.ablations.fixed_tau_comm == 1e-18);
    CHECK(second.sweep.base.learn.tau_q == 0.05);

    std::ostringstream out, err;
    const std::string cfg = (dir / "run.toml").string();
    const char* argv[] = {"mfcnet", "--config", cfg.c_str(), "--dump-config"};
    CHECK(run_cli(4, argv, out, err) == 0);
    CHECK(out.str() == text);
    CHECK(canonical_config_text(first.sweep.base).find("tau-q = 0.05") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("output directory from the environment") {
    ::setenv(kOutputDirEnv, "/tmp/from_env", 1);
    CHECK(parse({}).sweep.output_dir == fs::path("/tmp/from_env"));
    CHECK(parse({"--out", "here"}).sweep.output_dir == fs::path("here"));
    ::unsetenv(kOutputDirEnv);
    CHECK(parse({}).sweep.output_dir == fs::path("results"));
}

TEST_CASE("sweep planning") {
    SweepSpec spec = small_sweep("unused");
    const auto runs = plan_runs(spec);
    REQUIRE(runs.size() == 4);
    CHECK(runs[0].config.architecture == Architecture::Networked);
    CHECK(runs[0].config.seed == 0);
    CHECK(runs[1].config.seed == 1);
    CHECK(runs[2].config.architecture == Architecture::Independent);
    CHECK(runs[0].file_name != runs[1].file_name);
    spec.seeds = {};
    CHECK_THROWS_AS(plan_runs(spec), std::invalid_argument);
    spec.seeds = {2, 2};
    CHECK_THROWS_AS(plan_runs(spec), std::invalid_argument);
}

TEST_CASE("sweep output is complete and reproducible") {
    const fs::path a = scratch("mfc_sweep_a");
    const fs::path b = scratch("mfc_sweep_b");
    SweepSpec spec = small_sweep(a);
    const SweepOutcome first = run_sweep(spec);
    CHECK(first.completed == 4);
    CHECK(first.failed == 0);

    std::ifstream merged(first.merged_csv);
    const auto records = read_metrics_csv(merged);
    CHECK(records.size() == 4 * 2);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const bool same_run = records[r].label == records[r - 1].label;
        CHECK((!same_run || records[r].k == records[r - 1].k + 1));
    }

    const auto manifest = nlohmann::json::parse(slurp(first.manifest));
    CHECK(manifest["runs"].size() == 4);
    for (const auto& run : manifest["runs"]) {
        CHECK(run["status"] == "completed");
    }

    spec.output_dir = b;
    spec.parallel_runs = 2;
    spec.base.workers = 2;
    const SweepOutcome second = run_sweep(spec);
    CHECK(slurp(first.merged_csv) == slurp(second.merged_csv));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("a failing run does not stop the sweep") {
    const fs::path dir = scratch("mfc_sweep_fail");
    SweepSpec spec = small_sweep(dir);
    spec.base.checkpoint_every = 1;
    spec.base.checkpoint_dir = "/proc/forbidden/checkpoints";
    const SweepOutcome out = run_sweep(spec);
    CHECK(out.failed == 4);
    const auto manifest = nlohmann::json::parse(slurp(out.manifest));
    CHECK(manifest["runs"][0]["status"] == "failed");
    CHECK_FALSE(manifest["runs"][0]["error"].get<std::string>().empty());
    fs::remove_all(dir);
}
