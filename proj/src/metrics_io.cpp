#include "mfc/metrics_io.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mfc/numfmt.hpp"

namespace mfc {

RunLabel label_for(const ExperimentConfig& config) {
    RunLabel label;
    label.game = config.game;
    label.architecture = config.architecture;
    label.seed = config.seed;
    switch (config.architecture) {
    case Architecture::Networked: label.radius = config.radii.comm_radius_frac; break;
    case Architecture::Independent: label.radius = 0.0; break;
    case Architecture::CentralAgent: label.radius = 1.0; break;
    }
    return label;
}

void write_metrics_header(std::ostream& out) {
    out << kMetricsHeader << '\n';
}

void write_metrics_rows(std::ostream& out, const RunLabel& label, std::span<const MetricsRow> rows,
                        bool record_wall_time) {
    for (const MetricsRow& r : rows) {
        out << to_string(label.game) << ',' << to_string(label.architecture) << ','
            << format_real(label.radius) << ',' << label.seed << ',' << r.k << ',' << r.t << ','
            << format_real(r.v_pop_hat) << ',';
        if (record_wall_time) {
            out << format_real(r.wall_ms);
        }
        out << '\n';
    }
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                            : comma - start));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
    Int v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

} // namespace

std::vector<MetricsRecord> read_metrics_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader) {
        throw std::runtime_error("metrics file: missing or unexpected header");
    }
    std::vector<MetricsRecord> records;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        auto fail = [&](const std::string& what) {
            throw std::runtime_error("metrics file line " + std::to_string(line_no) + ": " + what);
        };
        const auto f = split(line);
        if (f.size() != 8) {
            fail("expected 8 fields, got " + std::to_string(f.size()));
        }
        MetricsRecord rec;
        const auto game = parse_game(f[0]);
        const auto arch = parse_architecture(f[1]);
        const auto radius = parse_real(f[2]);
        const auto seed = parse_int<std::uint64_t>(f[3]);
        const auto k = parse_int<int>(f[4]);
        const auto t = parse_int<long>(f[5]);
        const auto v = parse_real(f[6]);
        if (!game || !arch || !radius || !seed || !k || !t || !v) {
            fail("malformed field");
        }
        rec.label = {*game, *arch, *radius, *seed};
        rec.k = *k;
        rec.t = *t;
        rec.v_pop_hat = *v;
        if (!f[7].empty()) {
            const auto w = parse_real(f[7]);
            if (!w) {
                fail("malformed wall_ms");
            }
            rec.wall_ms = *w;
        }
        records.push_back(rec);
    }
    return records;
}

} // namespace mfc
