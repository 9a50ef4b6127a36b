#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "mfc/env.hpp"
#include "mfc/orchestrator.hpp"

namespace mfc {

inline constexpr std::string_view kMetricsHeader = "game,architecture,radius,seed,k,t,v_pop_hat,wall_ms";

/// Identifies one run in a metrics file.
struct RunLabel {
    GameKind game = GameKind::Cluster;
    Architecture architecture = Architecture::Networked;
    /// Broadcast radius fraction for networked runs; 0 for independent, 1 for central-agent.
    double radius = 1.0;
    std::uint64_t seed = 0;

    friend bool operator==(const RunLabel&, const RunLabel&) = default;
};

RunLabel label_for(const ExperimentConfig& config);

/// One parsed CSV line.
struct MetricsRecord {
    RunLabel label;
    int k = 0;
    long t = 0;
    double v_pop_hat = 0.0;
    /// Empty when wall time was not recorded.
    std::optional<double> wall_ms;

    friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

void write_metrics_header(std::ostream& out);
/// Reals at 17 significant digits with '.' as the decimal separator. The wall_ms field is
/// left empty unless `record_wall_time`, so identical runs give identical bytes.
void write_metrics_rows(std::ostream& out, const RunLabel& label, std::span<const MetricsRow> rows,
                        bool record_wall_time);
/// Expects the header line first. Throws std::runtime_error with the line number on bad input.
std::vector<MetricsRecord> read_metrics_csv(std::istream& in);

} // namespace mfc
