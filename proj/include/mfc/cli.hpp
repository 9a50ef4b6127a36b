#pragma once

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mfc/orchestrator.hpp"
#include "mfc/sweep.hpp"

namespace mfc {

/// Environment variable that replaces the default output directory when --out is absent.
inline constexpr const char* kOutputDirEnv = "MFC_OUTPUT_DIR";

/// A command-line problem with the exit code the process should return.
class CliError : public std::runtime_error {
public:
    CliError(const std::string& message, int exit_code)
        : std::runtime_error(message), exit_code_(exit_code) {}
    int exit_code() const { return exit_code_; }

private:
    int exit_code_;
};

struct CliOptions {
    SweepSpec sweep;
    bool dump_config = false;
    /// Set when --help was requested; holds the help text.
    std::optional<std::string> help;
};

/// Parses flags and an optional --config file (TOML/INI, keys are the long flag names).
/// Unset fields take the Table 1 defaults, or the desk preset's values under --preset desk.
/// Throws CliError on unknown flags, invalid values or conflicting ablations.
CliOptions parse_cli(int argc, const char* const* argv);

/// Canonical key = value text of one resolved configuration.
std::string canonical_config_text(const ExperimentConfig& config);
/// Canonical text of a whole sweep; it is accepted back by --config.
std::string canonical_sweep_text(const SweepSpec& sweep);

/// Entry point of the mfcnet tool. Returns 0 only if every run completed.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mfc
