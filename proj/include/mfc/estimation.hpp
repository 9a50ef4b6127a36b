#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "mfc/env.hpp"
#include "mfc/netgraph.hpp"

namespace mfc {

/// One agent's reward tagged with its unique ID.
struct RewardPacket {
    int agent_id = 0;
    double reward = 0.0;
};

/// Reward packets collected by one agent, keyed by agent ID so no reward is counted twice.
/// Packet values live in the population's reward table; the set records which IDs are held.
class RewardSet {
public:
    explicit RewardSet(int population = 0) : ids_(static_cast<std::size_t>(population)) {}

    void insert(int agent_id) { ids_.set(static_cast<std::size_t>(agent_id)); }
    void merge(const RewardSet& other) { ids_ |= other.ids_; }
    bool contains(int agent_id) const { return ids_.test(static_cast<std::size_t>(agent_id)); }
    std::size_t size() const { return ids_.count(); }
    bool is_subset_of(const RewardSet& other) const { return ids_.is_subset_of(other.ids_); }

    /// Packets in ascending ID order.
    std::vector<RewardPacket> packets(std::span<const double> rewards) const;
    /// Arithmetic mean of the held rewards, summed in ascending ID order.
    double mean(std::span<const double> rewards) const;

private:
    boost::dynamic_bitset<> ids_;
};

/// Per-agent count of occupants for every state, or unknown.
struct CountVector {
    static constexpr int kUnknown = -1;
    std::vector<int> counts;

    bool known(std::size_t s) const { return counts[s] != kUnknown; }
};

/// Optional CSV sink for protocol tracing: rows of (protocol, round, agent_id, size).
struct EstimationTrace {
    std::ostream* out = nullptr;
    long step = 0;
};

/// Gossip estimate of the population-average reward. After `rounds` broadcast/union rounds,
/// each agent averages the rewards of every agent within `rounds` hops of it.
std::vector<double> estimate_average_reward(std::span<const double> rewards, const CommGraph& graph,
                                            int rounds, const EstimationTrace& trace = {});

/// The per-agent reward sets after `rounds` rounds (the estimator's internal state).
std::vector<RewardSet> gossip_reward_sets(int population, const CommGraph& graph, int rounds,
                                          const EstimationTrace& trace = {});

/// Count vectors after local visibility counting and `rounds` rounds of merging with neighbours.
/// Throws std::logic_error if two agents report different counts for the same state.
std::vector<CountVector> gossip_count_vectors(std::span<const Cell> positions, const VisGraph& vis,
                                              const CommGraph& comm, int rounds, const GridSpec& grid,
                                              const EstimationTrace& trace = {});

/// Turns a count vector into a distribution: known counts / n, and the uncounted agents spread
/// uniformly over the unknown states. Throws std::logic_error if known counts exceed n.
MeanField complete_count_vector(const CountVector& cv, int n);

/// Decentralised estimate of the global empirical mean field, one per agent.
std::vector<MeanField> estimate_mean_field(std::span<const Cell> positions, const VisGraph& vis,
                                           const CommGraph& comm, int rounds, int n,
                                           const GridSpec& grid, const EstimationTrace& trace = {});

} // namespace mfc
