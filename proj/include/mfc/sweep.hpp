#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "mfc/env.hpp"
#include "mfc/metrics_io.hpp"
#include "mfc/orchestrator.hpp"

namespace mfc {

/// A cross product of runs over games, architectures, broadcast radii and seeds.
struct SweepSpec {
    ExperimentConfig base;
    std::vector<GameKind> games;
    std::vector<Architecture> architectures;
    /// Applied to both the communication and visibility radius of networked runs.
    std::vector<double> radii;
    std::vector<std::uint64_t> seeds;
    std::filesystem::path output_dir;
    /// Runs executed concurrently; each run additionally uses base.workers threads.
    int parallel_runs = 1;
    bool record_wall_time = false;
    /// Per-run estimation and exchange traces (CSV) in this directory when non-empty.
    std::filesystem::path trace_dir;
};

struct PlannedRun {
    int id = 0;
    ExperimentConfig config;
    RunLabel label;
    std::string file_name;
};

/// Expands the axes in (game, architecture, radius, seed) order. Non-networked
/// architectures ignore the radius axis and appear once per seed.
/// Throws std::invalid_argument on empty axes, repeated seeds, or an invalid base config.
std::vector<PlannedRun> plan_runs(const SweepSpec& spec);

struct SweepOutcome {
    int completed = 0;
    int failed = 0;
    std::filesystem::path merged_csv;
    std::filesystem::path manifest;
};

/// Executes every planned run. Each run writes its own CSV (via a temporary file and a
/// rename); afterwards the successful runs are concatenated in run-id order into
/// metrics.csv and manifest.json records every run's config and status. A failed run does
/// not stop the others.
SweepOutcome run_sweep(const SweepSpec& spec, std::ostream* log = nullptr);

} // namespace mfc
