#include "mfc/world.hpp"

#include <stdexcept>

namespace mfc {

World::World(const WorldSpec& spec, std::uint64_t seed, const Executor& executor)
    : spec_(spec), reward_model_(Game::make(spec.game, spec.grid), spec.grid, spec.population),
      vis_(build_vis_graph(spec.radii, spec.grid)), executor_(executor),
      link_rng_(make_stream(seed, StreamPurpose::Links)) {
    if (spec.population < 1) {
        throw std::invalid_argument("population must contain at least one agent");
    }
    Rng placement = make_stream(seed, StreamPurpose::Placement);
    positions_.reserve(static_cast<std::size_t>(spec.population));
    for (int i = 0; i < spec.population; ++i) {
        const auto s = uniform_index(placement, static_cast<std::uint64_t>(spec.grid.num_states()));
        positions_.push_back(spec.grid.cell(static_cast<int>(s)));
    }
}

const StepSnapshot& World::snapshot() {
    if (snapshot_valid_) {
        return snapshot_;
    }
    const GridSpec& grid = spec_.grid;
    snapshot_.t = t_;
    snapshot_.comm = build_comm_graph(positions_, spec_.radii, grid, link_rng_);
    snapshot_.true_mean_field = empirical_mean_field(positions_, grid);

    auto& obs = snapshot_.observations;
    obs.assign(positions_.size(), Observation{});
    switch (spec_.observation) {
    case ObservationMode::Estimated: {
        const auto estimates =
            estimate_mean_field(positions_, vis_, snapshot_.comm, spec_.mean_field_rounds,
                                spec_.population, grid, EstimationTrace{trace_, t_});
        for (std::size_t i = 0; i < positions_.size(); ++i) {
            obs[i] = encode_observation(positions_[i], estimates[i], grid);
        }
        break;
    }
    case ObservationMode::Oracle:
        for (std::size_t i = 0; i < positions_.size(); ++i) {
            obs[i] = encode_observation(positions_[i], snapshot_.true_mean_field, grid);
        }
        break;
    case ObservationMode::Zeros:
        for (std::size_t i = 0; i < positions_.size(); ++i) {
            obs[i] = encode_observation(positions_[i], grid);
        }
        break;
    }
    snapshot_valid_ = true;
    return snapshot_;
}

StepRecord World::step(std::span<const QNetwork* const> policies, double tau_q,
                       std::span<Rng> agent_rngs) {
    const std::size_t n = positions_.size();
    if (policies.size() != n || agent_rngs.size() != n) {
        throw std::invalid_argument("need one policy and one random stream per agent");
    }
    snapshot();

    StepRecord rec;
    rec.actions.resize(n);
    rec.rewards.resize(n);
    executor_.for_each(static_cast<int>(n), [&](int i) {
        const auto idx = static_cast<std::size_t>(i);
        const Eigen::VectorXd q = policies[idx]->forward(snapshot_.observations[idx]);
        const Eigen::VectorXd pi = policy_from_q(q, tau_q);
        rec.actions[idx] = action_from_index(sample_categorical(agent_rngs[idx], pi));
    });
    for (std::size_t i = 0; i < n; ++i) {
        rec.rewards[i] =
            reward_model_.normalized(positions_[i], rec.actions[i], snapshot_.true_mean_field);
    }
    for (std::size_t i = 0; i < n; ++i) {
        positions_[i] = transition(positions_[i], rec.actions[i], spec_.grid);
    }
    rec.before = std::move(snapshot_);
    snapshot_ = StepSnapshot{};
    snapshot_valid_ = false;
    ++t_;
    return rec;
}

} // namespace mfc
