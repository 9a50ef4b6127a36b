#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "mfc/env.hpp"
#include "mfc/learner.hpp"
#include "mfc/netgraph.hpp"
#include "mfc/qnetwork.hpp"

namespace mfc {

enum class Architecture { Networked, CentralAgent, Independent };

std::string_view to_string(Architecture a);
std::optional<Architecture> parse_architecture(std::string_view name);

/// Switches for the ablation experiments. Mutually exclusive pairs are rejected by validate().
struct Ablations {
    bool population_independent_obs = false;
    bool oracle_mean_field = false;
    bool individual_reward_only = false;
    bool oracle_average_reward = false;
    /// Constant communication temperature in place of the linear schedule.
    std::optional<double> fixed_tau_comm;
};

struct LoopCounts {
    int iterations = 150;       ///< K
    int collect_steps = 20;     ///< M, also the buffer capacity
    int learn_steps = 20;       ///< L
    int eval_steps = 20;        ///< E
    int policy_rounds = 1;      ///< C_p
    int reward_rounds = 1;      ///< C_r
    int mean_field_rounds = 1;  ///< C_e
};

struct ExperimentConfig {
    int height = 20;
    int width = 20;
    int population = 500;
    GameKind game = GameKind::Cluster;
    Architecture architecture = Architecture::Networked;
    RadiusPolicy radii;
    LoopCounts loops;
    LearnConstants learn;
    /// Hidden layer width; 0 picks the input size rounded down to a power of two.
    int hidden_width = 0;
    Ablations ablations;
    std::uint64_t seed = 0;
    int workers = 1;
    /// Dump every agent's parameters after each multiple of this many iterations (0 = never).
    int checkpoint_every = 0;
    std::filesystem::path checkpoint_dir;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    NetShape net_shape() const;
};

/// Table 1 values: 20x20, N=500, K=150, M=L=E=20, C=1, gamma=0.9, tau_q=0.03, |B|=32,
/// cl=-1, nu=L-1, lr=0.01.
ExperimentConfig default_config();
/// Desk-scale preset: the defaults on a 10x10 grid with N=50 and K=50.
ExperimentConfig desk_config();

struct MetricsRow {
    int k = 0;
    /// Clock value at the end of iteration k.
    long t = 0;
    /// sum_{m<M} gamma^m * (population-mean normalised reward at collection step m).
    double v_pop_hat = 0.0;
    double wall_ms = 0.0;
};

struct TrainingResult {
    std::vector<MetricsRow> rows;
    std::vector<QNetwork> policies;
    long final_t = 0;
};

/// Optional diagnostics sinks for one run.
struct RunHooks {
    std::ostream* estimation_trace = nullptr;
    std::ostream* exchange_trace = nullptr;
    /// Called after each iteration's row is recorded.
    std::function<void(const MetricsRow&)> on_row;
};

/// The full online learning loop for one configuration.
TrainingResult run_training(const ExperimentConfig& config, const RunHooks& hooks = {});

/// Agents that own and train a Q-network: only agent 0 under the central-agent architecture.
std::vector<int> which_learners(Architecture arch, int n);

/// The reward an agent stores in its buffer given its own reward, its gossip estimate and
/// the true population average.
double resolve_reward_signal(Architecture arch, const Ablations& ablations, double own,
                             double estimated, double oracle);

/// Clock value after a full run: K(M + E + C_p) for networked agents, K*M otherwise.
long expected_final_time(const ExperimentConfig& config);

} // namespace mfc
