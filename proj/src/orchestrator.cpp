#include "mfc/orchestrator.hpp"

#include <chrono>
#include <fstream>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mfc/estimation.hpp"
#include "mfc/exchange.hpp"
#include "mfc/executor.hpp"
#include "mfc/world.hpp"

namespace mfc {

std::string_view to_string(Architecture a) {
    switch (a) {
    case Architecture::Networked: return "networked";
    case Architecture::CentralAgent: return "central";
    case Architecture::Independent: return "independent";
    }
    return "?";
}

std::optional<Architecture> parse_architecture(std::string_view name) {
    for (Architecture a : {Architecture::Networked, Architecture::CentralAgent, Architecture::Independent}) {
        if (to_string(a) == name) {
            return a;
        }
    }
    return std::nullopt;
}

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw std::invalid_argument(message);
    }
}

} // namespace

void ExperimentConfig::validate() const {
    require(height >= 1 && width >= 1, "grid height and width must be at least 1");
    require(population >= 1, "population must be at least 1");
    require(loops.iterations >= 1, "K (iterations) must be at least 1");
    require(loops.collect_steps >= 1, "M (collection steps) must be at least 1");
    require(loops.learn_steps >= 0, "L (learning steps) must be non-negative");
    require(loops.eval_steps >= 1, "E (evaluation steps) must be at least 1");
    require(loops.policy_rounds >= 0, "C_p (policy rounds) must be non-negative");
    require(loops.reward_rounds >= 1, "C_r (reward rounds) must be at least 1");
    require(loops.mean_field_rounds >= 0, "C_e (mean-field rounds) must be non-negative");
    require(learn.gamma > 0.0 && learn.gamma < 1.0, "gamma must lie in (0, 1)");
    require(learn.tau_q > 0.0, "tau_q must be positive");
    require(learn.clip < 0.0, "cl (Munchausen clip) must be negative");
    require(learn.learning_rate > 0.0, "learning rate must be positive");
    require(learn.batch_size >= 1, "batch size must be at least 1");
    require(learn.target_sync_every >= 1, "nu (target sync period) must be at least 1");
    require(hidden_width >= 0, "hidden width must be non-negative (0 = automatic)");
    require(workers >= 1, "workers must be at least 1");
    require(checkpoint_every >= 0, "checkpoint interval must be non-negative");
    require(checkpoint_every == 0 || !checkpoint_dir.empty(),
            "checkpointing needs a checkpoint directory");
    radii.validate();
    require(!(ablations.individual_reward_only && ablations.oracle_average_reward),
            "individual-reward-only and oracle-average-reward ablations are mutually exclusive");
    require(!(ablations.population_independent_obs && ablations.oracle_mean_field),
            "population-independent and oracle-mean-field ablations are mutually exclusive");
    require(!ablations.fixed_tau_comm || *ablations.fixed_tau_comm > 0.0,
            "fixed tau_comm must be positive");
}

NetShape ExperimentConfig::net_shape() const {
    const int inputs = height + width + height * width;
    const int hidden = hidden_width > 0 ? hidden_width : default_hidden_width(inputs);
    return {inputs, hidden, hidden, kNumActions};
}

ExperimentConfig default_config() {
    return ExperimentConfig{};
}

ExperimentConfig desk_config() {
    ExperimentConfig c;
    c.height = 10;
    c.width = 10;
    c.population = 50;
    c.loops.iterations = 50;
    return c;
}

std::vector<int> which_learners(Architecture arch, int n) {
    if (arch == Architecture::CentralAgent) {
        return {0};
    }
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    return all;
}

double resolve_reward_signal(Architecture arch, const Ablations& ablations, double own,
                             double estimated, double oracle) {
    if (ablations.individual_reward_only) {
        return own;
    }
    if (ablations.oracle_average_reward || arch == Architecture::CentralAgent) {
        return oracle;
    }
    return estimated;
}

long expected_final_time(const ExperimentConfig& config) {
    const auto& l = config.loops;
    const long per_k = config.architecture == Architecture::Networked
                           ? l.collect_steps + l.eval_steps + l.policy_rounds
                           : l.collect_steps;
    return static_cast<long>(l.iterations) * per_k;
}

namespace {

WorldSpec world_spec_for(const ExperimentConfig& c) {
    WorldSpec spec;
    spec.grid = GridSpec(c.height, c.width);
    spec.population = c.population;
    spec.game = c.game;
    spec.mean_field_rounds = c.loops.mean_field_rounds;
    spec.radii = c.architecture == Architecture::Networked ? c.radii : RadiusPolicy::isolated();
    if (c.ablations.population_independent_obs) {
        spec.observation = ObservationMode::Zeros;
    } else if (c.ablations.oracle_mean_field || c.architecture == Architecture::CentralAgent) {
        spec.observation = ObservationMode::Oracle;
    } else {
        spec.observation = ObservationMode::Estimated;
    }
    return spec;
}

void dump_checkpoints(const std::filesystem::path& dir, int k, const std::vector<QNetwork>& nets) {
    const auto sub = dir / ("k" + std::to_string(k));
    std::filesystem::create_directories(sub);
    for (std::size_t i = 0; i < nets.size(); ++i) {
        std::ofstream out(sub / ("agent_" + std::to_string(i) + ".txt"));
        if (!out) {
            throw std::runtime_error("cannot write checkpoint in " + sub.string());
        }
        write_checkpoint(out, nets[i]);
    }
}

} // namespace

TrainingResult run_training(const ExperimentConfig& config, const RunHooks& hooks) {
    config.validate();
    const Executor executor(config.workers);
    World world(world_spec_for(config), config.seed, executor);
    world.set_trace(hooks.estimation_trace);

    const int n = config.population;
    const auto& loops = config.loops;
    const LearnConstants& lc = config.learn;
    const Architecture arch = config.architecture;
    const NetShape shape = config.net_shape();

    std::vector<QNetwork> nets;
    nets.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (arch == Architecture::CentralAgent && i > 0) {
            nets.push_back(nets.front()); // followers start from the central agent's policy
        } else {
            Rng init = make_stream(config.seed, StreamPurpose::AgentInit, static_cast<std::uint64_t>(i));
            nets.push_back(QNetwork::init_uniform(shape, init));
        }
    }
    std::vector<Rng> agent_rngs;
    agent_rngs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        agent_rngs.push_back(make_stream(config.seed, StreamPurpose::Agent, static_cast<std::uint64_t>(i)));
    }
    Rng push_rng = make_stream(config.seed, StreamPurpose::CentralPush);

    const std::vector<int> learner_ids = which_learners(arch, n);
    std::vector<AgentLearner> learners;
    learners.reserve(learner_ids.size());
    for (int id : learner_ids) {
        learners.emplace_back(nets[static_cast<std::size_t>(id)],
                              static_cast<std::size_t>(loops.collect_steps), lc.learning_rate);
    }

    auto policy_view = [&] {
        std::vector<const QNetwork*> v(nets.size());
        for (std::size_t i = 0; i < nets.size(); ++i) {
            v[i] = &nets[i];
        }
        return v;
    };

    const bool needs_gossip = arch != Architecture::CentralAgent &&
                              !config.ablations.individual_reward_only &&
                              !config.ablations.oracle_average_reward;

    TrainingResult result;
    result.rows.reserve(static_cast<std::size_t>(loops.iterations));
    for (int k = 0; k < loops.iterations; ++k) {
        const auto started = std::chrono::steady_clock::now();
        for (auto& l : learners) {
            l.buffer.clear();
        }

        double v_pop = 0.0;
        double discount = 1.0;
        const auto policies = policy_view();
        for (int m = 0; m < loops.collect_steps; ++m) {
            StepRecord rec = world.step(policies, lc.tau_q, agent_rngs);
            const double oracle =
                std::accumulate(rec.rewards.begin(), rec.rewards.end(), 0.0) / static_cast<double>(n);
            std::vector<double> estimated;
            if (needs_gossip) {
                estimated = estimate_average_reward(rec.rewards, rec.before.comm, loops.reward_rounds,
                                                    EstimationTrace{hooks.estimation_trace, rec.before.t});
            }
            const StepSnapshot& next = world.snapshot();
            for (std::size_t slot = 0; slot < learners.size(); ++slot) {
                const auto i = static_cast<std::size_t>(learner_ids[slot]);
                const double signal = resolve_reward_signal(
                    arch, config.ablations, rec.rewards[i], needs_gossip ? estimated[i] : oracle, oracle);
                learners[slot].buffer.push(Transition{std::move(rec.before.observations[i]),
                                                      rec.actions[i], signal, next.observations[i]});
            }
            v_pop += discount * oracle;
            discount *= lc.gamma;
        }

        if (loops.learn_steps > 0) {
            executor.for_each(static_cast<int>(learners.size()), [&](int slot) {
                const auto i = static_cast<std::size_t>(learner_ids[static_cast<std::size_t>(slot)]);
                learners[static_cast<std::size_t>(slot)].learn(nets[i], loops.learn_steps, lc, agent_rngs[i]);
            });
        }

        switch (arch) {
        case Architecture::Networked: {
            const auto sigma =
                evaluate_policies(world, policies, loops.eval_steps, lc.gamma, lc.tau_q, agent_rngs);
            std::vector<PolicyPacket> packets(static_cast<std::size_t>(n));
            for (std::size_t i = 0; i < packets.size(); ++i) {
                packets[i] = {sigma[i], std::make_shared<const QNetwork>(nets[i])};
            }
            const std::vector<PolicyPacket> start = packets;
            run_exchange(world, packets, loops.policy_rounds,
                         tau_comm_schedule(k, loops.iterations, config.ablations.fixed_tau_comm), lc.tau_q,
                         agent_rngs, ExchangeTrace{hooks.exchange_trace, k});
            for (std::size_t i = 0; i < packets.size(); ++i) {
                if (packets[i].params != start[i].params) {
                    nets[i] = *packets[i].params;
                }
            }
            break;
        }
        case Architecture::CentralAgent:
            for (std::size_t i = 1; i < nets.size(); ++i) {
                const bool lost = config.radii.link_failure_prob > 0.0 &&
                                  bernoulli(push_rng, config.radii.link_failure_prob);
                if (!lost) {
                    nets[i] = nets[0];
                }
            }
            break;
        case Architecture::Independent:
            break;
        }

        const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started);
        result.rows.push_back({k, world.time(), v_pop, elapsed.count()});
        if (hooks.on_row) {
            hooks.on_row(result.rows.back());
        }
        if (config.checkpoint_every > 0 && (k + 1) % config.checkpoint_every == 0) {
            dump_checkpoints(config.checkpoint_dir, k, nets);
        }
    }
    result.final_t = world.time();
    result.policies = std::move(nets);
    return result;
}

} // namespace mfc
