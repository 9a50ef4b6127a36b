#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "mfc/netgraph.hpp"
#include "mfc/qnetwork.hpp"
#include "mfc/rng.hpp"
#include "mfc/world.hpp"

namespace mfc {

/// A policy offered to neighbours: its finite-horizon score and its Q-network parameters.
struct PolicyPacket {
    double sigma = 0.0;
    std::shared_ptr<const QNetwork> params;
};

/// Runs the live system for `steps` steps with each agent's own policy and returns
/// sigma_i = sum_e gamma^e r_i(e). Nothing is stored for training.
std::vector<double> evaluate_policies(World& world, std::span<const QNetwork* const> policies,
                                      int steps, double gamma, double tau_q,
                                      std::span<Rng> agent_rngs);

/// exp(sigma_j / tau) normalised over the candidates, with max-subtraction.
std::vector<double> adoption_probabilities(std::span<const double> sigmas, double tau);

struct AdoptionResult {
    std::vector<PolicyPacket> packets;
    /// Index of the agent whose round-start packet each agent now holds.
    std::vector<int> adopted_from;
};

/// One synchronous adoption round: each agent i samples from J = {i} u neighbours(i)
/// against the round-start packets, then all adopt at once. Agent i's draw uses agent_rngs[i].
AdoptionResult adoption_round(std::span<const PolicyPacket> packets, const CommGraph& graph,
                              double tau_comm, std::span<Rng> agent_rngs);

/// Optional CSV sink: rows of (k, round, agent_id, adopted_from, sigma).
struct ExchangeTrace {
    std::ostream* out = nullptr;
    int k = 0;
};

/// `rounds` iterations of {adoption round on the current graph; one live step with the
/// adopted policies}. Zero rounds leave packets and the world untouched.
void run_exchange(World& world, std::vector<PolicyPacket>& packets, int rounds, double tau_comm,
                  double tau_q, std::span<Rng> agent_rngs, const ExchangeTrace& trace = {});

/// Communication temperature for outer iteration k of K: linear from 0.001 to 1,
/// or `fixed` when given.
double tau_comm_schedule(int k, int total, std::optional<double> fixed = std::nullopt);

} // namespace mfc
