#include "mfc/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

namespace mfc {

namespace {

std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T, typename Fmt>
std::string toml_array(const std::vector<T>& values, Fmt fmt) {
    std::string s = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        s += (i ? ", " : "") + fmt(values[i]);
    }
    return s + "]";
}

std::string quoted(std::string_view s) {
    return "\"" + std::string(s) + "\"";
}

/// Applies `value` to `field` unless the option was given on the command line or in a config file.
template <typename T>
void preset_if_unset(const CLI::Option* opt, T& field, const T& value) {
    if (opt->count() == 0) {
        field = value;
    }
}

} // namespace

std::string canonical_config_text(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "height = " << c.height << '\n'
        << "width = " << c.width << '\n'
        << "agents = " << c.population << '\n'
        << "game = " << quoted(to_string(c.game)) << '\n'
        << "arch = " << quoted(to_string(c.architecture)) << '\n'
        << "comm-radius = " << shortest(c.radii.comm_radius_frac) << '\n'
        << "vis-radius = " << shortest(c.radii.vis_radius_frac) << '\n'
        << "link-failure = " << shortest(c.radii.link_failure_prob) << '\n'
        << "iterations = " << c.loops.iterations << '\n'
        << "collect-steps = " << c.loops.collect_steps << '\n'
        << "learn-steps = " << c.loops.learn_steps << '\n'
        << "eval-steps = " << c.loops.eval_steps << '\n'
        << "policy-rounds = " << c.loops.policy_rounds << '\n'
        << "reward-rounds = " << c.loops.reward_rounds << '\n'
        << "mean-field-rounds = " << c.loops.mean_field_rounds << '\n'
        << "gamma = " << shortest(c.learn.gamma) << '\n'
        << "tau-q = " << shortest(c.learn.tau_q) << '\n'
        << "clip = " << shortest(c.learn.clip) << '\n'
        << "lr = " << shortest(c.learn.learning_rate) << '\n'
        << "batch-size = " << c.learn.batch_size << '\n'
        << "nu = " << c.learn.target_sync_every << '\n'
        << "hidden = " << c.net_shape().hidden1 << '\n'
        << "population-independent = " << std::boolalpha << c.ablations.population_independent_obs << '\n'
        << "oracle-mean-field = " << c.ablations.oracle_mean_field << '\n'
        << "individual-reward-only = " << c.ablations.individual_reward_only << '\n'
        << "oracle-average-reward = " << c.ablations.oracle_average_reward << '\n';
    if (c.ablations.fixed_tau_comm) {
        out << "fixed-tau-comm = " << shortest(*c.ablations.fixed_tau_comm) << '\n';
    }
    out << "seed = " << c.seed << '\n' << "workers = " << c.workers << '\n';
    return out.str();
}

std::string canonical_sweep_text(const SweepSpec& s) {
    const ExperimentConfig& c = s.base;
    std::ostringstream out;
    out << "height = " << c.height << '\n'
        << "width = " << c.width << '\n'
        << "agents = " << c.population << '\n'
        << "game = " << toml_array(s.games, [](GameKind g) { return quoted(to_string(g)); }) << '\n'
        << "arch = " << toml_array(s.architectures, [](Architecture a) { return quoted(to_string(a)); }) << '\n'
        << "radius = " << toml_array(s.radii, shortest) << '\n';
    if (c.radii.vis_radius_frac != c.radii.comm_radius_frac) {
        out << "vis-radius = " << shortest(c.radii.vis_radius_frac) << '\n';
    }
    out << "link-failure = " << shortest(c.radii.link_failure_prob) << '\n'
        << "iterations = " << c.loops.iterations << '\n'
        << "collect-steps = " << c.loops.collect_steps << '\n'
        << "learn-steps = " << c.loops.learn_steps << '\n'
        << "eval-steps = " << c.loops.eval_steps << '\n'
        << "policy-rounds = " << c.loops.policy_rounds << '\n'
        << "reward-rounds = " << c.loops.reward_rounds << '\n'
        << "mean-field-rounds = " << c.loops.mean_field_rounds << '\n'
        << "gamma = " << shortest(c.learn.gamma) << '\n'
        << "tau-q = " << shortest(c.learn.tau_q) << '\n'
        << "clip = " << shortest(c.learn.clip) << '\n'
        << "lr = " << shortest(c.learn.learning_rate) << '\n'
        << "batch-size = " << c.learn.batch_size << '\n'
        << "nu = " << c.learn.target_sync_every << '\n'
        << "hidden = " << c.hidden_width << '\n'
        << "population-independent = " << std::boolalpha << c.ablations.population_independent_obs << '\n'
        << "oracle-mean-field = " << c.ablations.oracle_mean_field << '\n'
        << "individual-reward-only = " << c.ablations.individual_reward_only << '\n'
        << "oracle-average-reward = " << c.ablations.oracle_average_reward << '\n';
    if (c.ablations.fixed_tau_comm) {
        out << "fixed-tau-comm = " << shortest(*c.ablations.fixed_tau_comm) << '\n';
    }
    out << "seed-list = " << toml_array(s.seeds, [](std::uint64_t v) { return std::to_string(v); }) << '\n'
        << "workers = " << c.workers << '\n'
        << "parallel-runs = " << s.parallel_runs << '\n'
        << "out = " << quoted(s.output_dir.string()) << '\n'
        << "record-wall-time = " << s.record_wall_time << '\n';
    if (c.checkpoint_every > 0) {
        out << "checkpoint-every = " << c.checkpoint_every << '\n'
            << "checkpoint-dir = " << quoted(c.checkpoint_dir.string()) << '\n';
    }
    if (!s.trace_dir.empty()) {
        out << "trace-dir = " << quoted(s.trace_dir.string()) << '\n';
    }
    return out.str();
}

CliOptions parse_cli(int argc, const char* const* argv) {
    CLI::App app{"Online mean-field control learning with networked, central-agent and independent agents",
                 "mfcnet"};
    app.set_config("--config", "", "Read options from a TOML/INI file (keys are long flag names)");

    ExperimentConfig cfg = default_config();
    std::string preset = "table1";
    std::vector<std::string> games{"cluster"};
    std::vector<std::string> archs{"networked"};
    std::vector<double> radii{1.0};
    double vis_radius = 1.0;
    int comm_rounds = 1;
    double fixed_tau = 0.0;
    std::uint64_t seed = 0;
    int seed_count = 0;
    std::vector<std::uint64_t> seed_list;
    std::string out_dir = "results";
    std::string trace_dir;
    std::string checkpoint_dir;
    int parallel_runs = 1;
    bool record_wall = false;
    bool dump = false;

    app.add_option("--preset", preset, "Baseline values: table1 (20x20, N=500, K=150) or desk (10x10, N=50, K=50)")
        ->check(CLI::IsMember({"table1", "desk"}));
    auto* o_height = app.add_option("--height", cfg.height, "Grid rows")->check(CLI::PositiveNumber);
    auto* o_width = app.add_option("--width", cfg.width, "Grid columns")->check(CLI::PositiveNumber);
    auto* o_agents = app.add_option("-n,--agents", cfg.population, "Population size N")->check(CLI::PositiveNumber);
    app.add_option("--game", games, "Game(s): cluster, target_selection, disperse, target_coverage, beach_bar, shape_formation")
        ->delimiter(',');
    app.add_option("--arch", archs, "Architecture(s): networked, central, independent")->delimiter(',');
    app.add_option("--radius,--comm-radius", radii,
                   "Broadcast radius fraction(s) of the maximum grid distance, for communication and visibility")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));
    auto* o_vis = app.add_option("--vis-radius", vis_radius, "Visibility radius fraction, when it differs from --radius")
                      ->check(CLI::Range(0.0, 1.0));
    app.add_option("--link-failure", cfg.radii.link_failure_prob, "Per-link failure probability")
        ->check(CLI::Range(0.0, 1.0));

    auto* o_k = app.add_option("-K,--iterations", cfg.loops.iterations, "Outer iterations K");
    app.add_option("-M,--collect-steps", cfg.loops.collect_steps, "Collection steps (and buffer size) M");
    auto* o_l = app.add_option("-L,--learn-steps", cfg.loops.learn_steps, "Learning steps L");
    app.add_option("-E,--eval-steps", cfg.loops.eval_steps, "Evaluation steps E");
    auto* o_cp = app.add_option("--policy-rounds", cfg.loops.policy_rounds, "Policy adoption rounds C_p");
    auto* o_cr = app.add_option("--reward-rounds", cfg.loops.reward_rounds, "Average-reward gossip rounds C_r");
    auto* o_ce = app.add_option("--mean-field-rounds", cfg.loops.mean_field_rounds, "Mean-field gossip rounds C_e");
    auto* o_comm = app.add_option("--comm-rounds", comm_rounds, "Set C_p, C_r and C_e together");

    app.add_option("--gamma", cfg.learn.gamma, "Discount factor");
    app.add_option("--tau-q", cfg.learn.tau_q, "Q-softmax temperature");
    app.add_option("--clip", cfg.learn.clip, "Munchausen log-policy clip cl (negative)");
    app.add_option("--lr", cfg.learn.learning_rate, "Adam learning rate");
    app.add_option("--batch-size", cfg.learn.batch_size, "Batch size |B|");
    auto* o_nu = app.add_option("--nu", cfg.learn.target_sync_every, "Target sync period (default L-1)");
    app.add_option("--hidden", cfg.hidden_width, "Hidden layer width (0 = input size rounded down to a power of 2)");

    app.add_flag("--population-independent", cfg.ablations.population_independent_obs,
                 "Agents observe zeros in place of the mean field");
    app.add_flag("--oracle-mean-field", cfg.ablations.oracle_mean_field, "Agents observe the true mean field");
    app.add_flag("--individual-reward-only", cfg.ablations.individual_reward_only,
                 "Agents train on their own reward only");
    app.add_flag("--oracle-average-reward", cfg.ablations.oracle_average_reward,
                 "Agents train on the true population-average reward");
    auto* o_fixed = app.add_option("--fixed-tau-comm", fixed_tau, "Constant communication temperature");

    auto* o_seed = app.add_option("--seed", seed, "Single run seed");
    auto* o_seeds = app.add_option("--seeds", seed_count, "Run seeds 0..N-1")->check(CLI::PositiveNumber);
    auto* o_seed_list = app.add_option("--seed-list", seed_list, "Explicit seeds")->delimiter(',');
    o_seed->excludes(o_seeds)->excludes(o_seed_list);
    o_seeds->excludes(o_seed_list);

    app.add_option("--workers", cfg.workers, "Threads per run")->check(CLI::PositiveNumber);
    app.add_option("--parallel-runs", parallel_runs, "Runs executed concurrently")->check(CLI::PositiveNumber);
    auto* o_out = app.add_option("--out", out_dir, std::string("Output directory (default: $") + kOutputDirEnv +
                                                       " or ./results)");
    app.add_flag("--record-wall-time", record_wall, "Fill the wall_ms column (breaks byte-identical reruns)");
    app.add_option("--trace-dir", trace_dir, "Write per-run gossip and adoption traces here");
    app.add_option("--checkpoint-every", cfg.checkpoint_every, "Dump all agents' parameters every this many iterations");
    app.add_option("--checkpoint-dir", checkpoint_dir, "Checkpoint directory");
    app.add_flag("--dump-config", dump, "Print the resolved configuration and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        CliOptions help;
        help.help = app.help();
        return help;
    } catch (const CLI::ParseError& e) {
        throw CliError(e.what(), 2);
    }

    if (preset == "desk") {
        const ExperimentConfig desk = desk_config();
        preset_if_unset(o_height, cfg.height, desk.height);
        preset_if_unset(o_width, cfg.width, desk.width);
        preset_if_unset(o_agents, cfg.population, desk.population);
        preset_if_unset(o_k, cfg.loops.iterations, desk.loops.iterations);
    }
    if (o_comm->count() > 0) {
        preset_if_unset(o_cp, cfg.loops.policy_rounds, comm_rounds);
        preset_if_unset(o_cr, cfg.loops.reward_rounds, comm_rounds);
        preset_if_unset(o_ce, cfg.loops.mean_field_rounds, comm_rounds);
    }
    if (o_nu->count() == 0 && o_l->count() > 0) {
        cfg.learn.target_sync_every = std::max(1, cfg.loops.learn_steps - 1);
    }
    if (o_fixed->count() > 0) {
        cfg.ablations.fixed_tau_comm = fixed_tau;
    }
    cfg.checkpoint_dir = checkpoint_dir;

    CliOptions opts;
    SweepSpec& sweep = opts.sweep;
    for (const auto& g : games) {
        const auto parsed = parse_game(g);
        if (!parsed) {
            throw CliError("unknown game '" + g +
                               "'; expected one of cluster, target_selection, disperse, target_coverage, "
                               "beach_bar, shape_formation",
                           2);
        }
        sweep.games.push_back(*parsed);
    }
    for (const auto& a : archs) {
        const auto parsed = parse_architecture(a);
        if (!parsed) {
            throw CliError("unknown architecture '" + a + "'; expected networked, central or independent", 2);
        }
        sweep.architectures.push_back(*parsed);
    }
    sweep.radii = radii;
    cfg.radii.comm_radius_frac = radii.front();
    cfg.radii.vis_radius_frac = o_vis->count() > 0 ? vis_radius : radii.front();

    if (!seed_list.empty()) {
        sweep.seeds = seed_list;
    } else if (seed_count > 0) {
        for (int s = 0; s < seed_count; ++s) {
            sweep.seeds.push_back(static_cast<std::uint64_t>(s));
        }
    } else {
        sweep.seeds = {seed};
    }
    cfg.seed = sweep.seeds.front();

    if (o_out->count() == 0) {
        if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
            out_dir = env;
        }
    }
    sweep.output_dir = out_dir;
    sweep.trace_dir = trace_dir;
    sweep.parallel_runs = parallel_runs;
    sweep.record_wall_time = record_wall;
    sweep.base = cfg;
    opts.dump_config = dump;

    try {
        plan_runs(sweep);
    } catch (const std::invalid_argument& e) {
        throw CliError(std::string("invalid configuration: ") + e.what(), 2);
    }
    if (o_vis->count() > 0) {
        // plan_runs applies the radius axis to both radii; keep an explicit visibility radius.
        sweep.base.radii.vis_radius_frac = vis_radius;
    }
    return opts;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CliOptions opts;
    try {
        opts = parse_cli(argc, argv);
    } catch (const CliError& e) {
        err << "mfcnet: " << e.what() << '\n';
        return e.exit_code();
    }
    if (opts.help) {
        out << *opts.help;
        return 0;
    }
    if (opts.dump_config) {
        out << canonical_sweep_text(opts.sweep);
        return 0;
    }
    try {
        const SweepOutcome outcome = run_sweep(opts.sweep, &err);
        out << "completed " << outcome.completed << " run(s), failed " << outcome.failed << "; metrics in "
            << outcome.merged_csv.string() << '\n';
        return outcome.failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        err << "mfcnet: " << e.what() << '\n';
        return 1;
    }
}

} // namespace mfc
