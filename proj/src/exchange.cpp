#include "mfc/exchange.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfc {

std::vector<double> evaluate_policies(World& world, std::span<const QNetwork* const> policies,
                                      int steps, double gamma, double tau_q,
                                      std::span<Rng> agent_rngs) {
    if (steps < 1) {
        throw std::invalid_argument("policy evaluation needs at least one step");
    }
    std::vector<double> sigma(policies.size(), 0.0);
    double discount = 1.0;
    for (int e = 0; e < steps; ++e) {
        const StepRecord rec = world.step(policies, tau_q, agent_rngs);
        for (std::size_t i = 0; i < sigma.size(); ++i) {
            sigma[i] += discount * rec.rewards[i];
        }
        discount *= gamma;
    }
    return sigma;
}

std::vector<double> adoption_probabilities(std::span<const double> sigmas, double tau) {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("communication temperature must be positive");
    }
    const double top = *std::max_element(sigmas.begin(), sigmas.end());
    std::vector<double> p(sigmas.size());
    double total = 0.0;
    for (std::size_t j = 0; j < sigmas.size(); ++j) {
        p[j] = std::exp((sigmas[j] - top) / tau);
        total += p[j];
    }
    for (double& x : p) {
        x /= total;
    }
    return p;
}

AdoptionResult adoption_round(std::span<const PolicyPacket> packets, const CommGraph& graph,
                              double tau_comm, std::span<Rng> agent_rngs) {
    const int n = static_cast<int>(packets.size());
    if (graph.size() != n || agent_rngs.size() != packets.size()) {
        throw std::invalid_argument("adoption needs one packet, vertex and stream per agent");
    }
    AdoptionResult out;
    out.adopted_from.resize(packets.size());
    std::vector<int> candidates;
    std::vector<double> sigmas;
    for (int i = 0; i < n; ++i) {
        candidates.assign(1, i);
        const auto nb = graph.neighbors(i);
        candidates.insert(candidates.end(), nb.begin(), nb.end());
        sigmas.clear();
        for (int j : candidates) {
            sigmas.push_back(packets[static_cast<std::size_t>(j)].sigma);
        }
        int chosen = i;
        if (candidates.size() > 1) {
            const auto probs = adoption_probabilities(sigmas, tau_comm);
            chosen = candidates[static_cast<std::size_t>(
                sample_categorical(agent_rngs[static_cast<std::size_t>(i)], probs))];
        }
        out.adopted_from[static_cast<std::size_t>(i)] = chosen;
    }
    out.packets.reserve(packets.size());
    for (int src : out.adopted_from) {
        out.packets.push_back(packets[static_cast<std::size_t>(src)]);
    }
    return out;
}

void run_exchange(World& world, std::vector<PolicyPacket>& packets, int rounds, double tau_comm,
                  double tau_q, std::span<Rng> agent_rngs, const ExchangeTrace& trace) {
    std::vector<const QNetwork*> policies(packets.size());
    for (int round = 1; round <= rounds; ++round) {
        const CommGraph& graph = world.snapshot().comm;
        AdoptionResult adopted = adoption_round(packets, graph, tau_comm, agent_rngs);
        if (trace.out) {
            for (std::size_t i = 0; i < packets.size(); ++i) {
                *trace.out << trace.k << ',' << round << ',' << i << ',' << adopted.adopted_from[i]
                           << ',' << adopted.packets[i].sigma << '\n';
            }
        }
        packets = std::move(adopted.packets);
        for (std::size_t i = 0; i < packets.size(); ++i) {
            policies[i] = packets[i].params.get();
        }
        world.step(policies, tau_q, agent_rngs);
    }
}

double tau_comm_schedule(int k, int total, std::optional<double> fixed) {
    if (fixed) {
        return *fixed;
    }
    if (total < 1 || k < 0 || k >= total) {
        throw std::out_of_range("iteration index outside [0, K)");
    }
    constexpr double kStart = 0.001;
    constexpr double kEnd = 1.0;
    if (total == 1) {
        return kStart;
    }
    return kStart + (kEnd - kStart) * static_cast<double>(k) / static_cast<double>(total - 1);
}

} // namespace mfc
