#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfc/env.hpp"
#include "mfc/estimation.hpp"
#include "mfc/executor.hpp"
#include "mfc/learner.hpp"
#include "mfc/netgraph.hpp"
#include "mfc/qnetwork.hpp"
#include "mfc/rng.hpp"

namespace mfc {

/// What agents observe in the mean-field block of their observation.
enum class ObservationMode {
    Estimated, ///< decentralised estimate from visibility counts and gossip
    Oracle,    ///< the true empirical mean field
    Zeros,     ///< population-independent policies
};

struct WorldSpec {
    GridSpec grid{20, 20};
    int population = 500;
    GameKind game = GameKind::Cluster;
    RadiusPolicy radii;
    int mean_field_rounds = 1;
    ObservationMode observation = ObservationMode::Estimated;
};

/// Everything fixed at time t before agents act: the communication graph drawn for t,
/// the true mean field, and each agent's observation.
struct StepSnapshot {
    long t = 0;
    CommGraph comm{0};
    MeanField true_mean_field;
    std::vector<Observation> observations;
};

/// One environment step: the pre-step snapshot, the actions taken, and the normalised
/// individual rewards computed from the true mean field.
struct StepRecord {
    StepSnapshot before;
    std::vector<Action> actions;
    std::vector<double> rewards;
};

/// The live, non-episodic system. The clock only moves forward.
class World {
public:
    World(const WorldSpec& spec, std::uint64_t seed, const Executor& executor);

    const WorldSpec& spec() const { return spec_; }
    const GridSpec& grid() const { return spec_.grid; }
    const RewardModel& rewards() const { return reward_model_; }
    const VisGraph& visibility() const { return vis_; }
    long time() const { return t_; }
    std::span<const Cell> positions() const { return positions_; }

    /// Snapshot for the current time, built on first request and reused until the next step.
    const StepSnapshot& snapshot();

    /// Each agent samples an action from softmax(Q(o) / tau_q) with its own stream, collects
    /// its reward and moves. Advances the clock by one.
    StepRecord step(std::span<const QNetwork* const> policies, double tau_q, std::span<Rng> agent_rngs);

    /// Optional CSV sink for per-round gossip set sizes.
    void set_trace(std::ostream* out) { trace_ = out; }

private:
    WorldSpec spec_;
    RewardModel reward_model_;
    VisGraph vis_;
    const Executor& executor_;
    Rng link_rng_;
    std::vector<Cell> positions_;
    long t_ = 0;
    bool snapshot_valid_ = false;
    StepSnapshot snapshot_;
    std::ostream* trace_ = nullptr;
};

} // namespace mfc
