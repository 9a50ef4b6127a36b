#include "mfc/sweep.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mfc/cli.hpp"
#include "mfc/executor.hpp"
#include "mfc/numfmt.hpp"

namespace mfc {

std::vector<PlannedRun> plan_runs(const SweepSpec& spec) {
    if (spec.games.empty() || spec.architectures.empty() || spec.radii.empty() || spec.seeds.empty()) {
        throw std::invalid_argument("sweep axes must be non-empty (games, architectures, radii, seeds)");
    }
    if (std::set<std::uint64_t>(spec.seeds.begin(), spec.seeds.end()).size() != spec.seeds.size()) {
        throw std::invalid_argument("sweep seeds must be distinct");
    }
    std::vector<PlannedRun> runs;
    for (GameKind game : spec.games) {
        for (Architecture arch : spec.architectures) {
            const std::vector<double> radii =
                arch == Architecture::Networked ? spec.radii : std::vector<double>{spec.radii.front()};
            for (double radius : radii) {
                for (std::uint64_t seed : spec.seeds) {
                    PlannedRun run;
                    run.id = static_cast<int>(runs.size());
                    run.config = spec.base;
                    run.config.game = game;
                    run.config.architecture = arch;
                    run.config.radii.comm_radius_frac = radius;
                    run.config.radii.vis_radius_frac = radius;
                    run.config.seed = seed;
                    run.config.validate();
                    run.label = label_for(run.config);
                    std::ostringstream name;
                    name << "run_" << std::setw(4) << std::setfill('0') << run.id << '_'
                         << to_string(game) << '_' << to_string(arch) << "_r" << format_real(run.label.radius)
                         << "_s" << seed << ".csv";
                    run.file_name = name.str();
                    runs.push_back(std::move(run));
                }
            }
        }
    }
    return runs;
}

namespace {

struct RunStatus {
    bool ok = false;
    std::string error;
};

RunStatus execute_run(const PlannedRun& run, const SweepSpec& spec) {
    try {
        std::ofstream est_trace;
        std::ofstream ex_trace;
        RunHooks hooks;
        if (!spec.trace_dir.empty()) {
            std::filesystem::create_directories(spec.trace_dir);
            const std::string stem = std::filesystem::path(run.file_name).stem().string();
            est_trace.open(spec.trace_dir / (stem + "_estimation.csv"));
            ex_trace.open(spec.trace_dir / (stem + "_exchange.csv"));
            est_trace << "protocol,t,round,agent_id,size\n";
            ex_trace << "k,round,agent_id,adopted_from,sigma\n";
            hooks.estimation_trace = &est_trace;
            hooks.exchange_trace = &ex_trace;
        }
        const TrainingResult result = run_training(run.config, hooks);

        const auto final_path = spec.output_dir / run.file_name;
        auto tmp_path = final_path;
        tmp_path += ".tmp";
        {
            std::ofstream out(tmp_path, std::ios::binary);
            if (!out) {
                throw std::runtime_error("cannot open " + tmp_path.string());
            }
            write_metrics_header(out);
            write_metrics_rows(out, run.label, result.rows, spec.record_wall_time);
            out.flush();
            if (!out) {
                throw std::runtime_error("write failed for " + tmp_path.string());
            }
        }
        std::filesystem::rename(tmp_path, final_path);
        return {true, {}};
    } catch (const std::exception& e) {
        return {false, e.what()};
    }
}

} // namespace

SweepOutcome run_sweep(const SweepSpec& spec, std::ostream* log) {
    const std::vector<PlannedRun> runs = plan_runs(spec);
    std::filesystem::create_directories(spec.output_dir);

    std::vector<RunStatus> status(runs.size());
    std::mutex log_mutex;
    const Executor executor(spec.parallel_runs);
    executor.for_each(static_cast<int>(runs.size()), [&](int i) {
        const auto& run = runs[static_cast<std::size_t>(i)];
        status[static_cast<std::size_t>(i)] = execute_run(run, spec);
        if (log) {
            std::lock_guard lock(log_mutex);
            *log << (status[static_cast<std::size_t>(i)].ok ? "done   " : "FAILED ") << run.file_name;
            if (!status[static_cast<std::size_t>(i)].ok) {
                *log << ": " << status[static_cast<std::size_t>(i)].error;
            }
            *log << '\n';
        }
    });

    SweepOutcome outcome;
    outcome.merged_csv = spec.output_dir / "metrics.csv";
    outcome.manifest = spec.output_dir / "manifest.json";
    {
        std::ofstream merged(outcome.merged_csv, std::ios::binary);
        write_metrics_header(merged);
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if (!status[i].ok) {
                continue;
            }
            std::ifstream in(spec.output_dir / runs[i].file_name, std::ios::binary);
            std::string line;
            std::getline(in, line); // header
            while (std::getline(in, line)) {
                merged << line << '\n';
            }
        }
        if (!merged) {
            throw std::runtime_error("cannot write " + outcome.merged_csv.string());
        }
    }

    nlohmann::json manifest;
    manifest["merged"] = outcome.merged_csv.filename().string();
    manifest["runs"] = nlohmann::json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& run = runs[i];
        nlohmann::json entry;
        entry["id"] = run.id;
        entry["file"] = run.file_name;
        entry["game"] = std::string(to_string(run.label.game));
        entry["architecture"] = std::string(to_string(run.label.architecture));
        entry["radius"] = run.label.radius;
        entry["seed"] = run.label.seed;
        entry["status"] = status[i].ok ? "completed" : "failed";
        if (!status[i].ok) {
            entry["error"] = status[i].error;
        }
        entry["config"] = canonical_config_text(run.config);
        manifest["runs"].push_back(std::move(entry));
        (status[i].ok ? outcome.completed : outcome.failed) += 1;
    }
    std::ofstream(outcome.manifest) << manifest.dump(2) << '\n';
    return outcome;
}

} // namespace mfc
