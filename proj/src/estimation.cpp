#include "mfc/estimation.hpp"

#include <stdexcept>
#include <string>

namespace mfc {

std::vector<RewardPacket> RewardSet::packets(std::span<const double> rewards) const {
    std::vector<RewardPacket> out;
    out.reserve(size());
    for (auto id = ids_.find_first(); id != boost::dynamic_bitset<>::npos; id = ids_.find_next(id)) {
        out.push_back({static_cast<int>(id), rewards[id]});
    }
    return out;
}

double RewardSet::mean(std::span<const double> rewards) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (auto id = ids_.find_first(); id != boost::dynamic_bitset<>::npos; id = ids_.find_next(id)) {
        sum += rewards[id];
        ++count;
    }
    if (count == 0) {
        throw std::logic_error("reward set is empty; every agent holds at least its own packet");
    }
    return sum / static_cast<double>(count);
}

std::vector<RewardSet> gossip_reward_sets(int population, const CommGraph& graph, int rounds,
                                          const EstimationTrace& trace) {
    if (graph.size() != population) {
        throw std::invalid_argument("communication graph size does not match the population");
    }
    std::vector<RewardSet> sets;
    sets.reserve(static_cast<std::size_t>(population));
    for (int i = 0; i < population; ++i) {
        sets.emplace_back(population);
        sets.back().insert(i);
    }
    for (int round = 1; round <= rounds; ++round) {
        // Broadcasts of this round are read from the round-start snapshot.
        const std::vector<RewardSet> broadcast = sets;
        for (int i = 0; i < population; ++i) {
            for (int j : graph.neighbors(i)) {
                sets[static_cast<std::size_t>(i)].merge(broadcast[static_cast<std::size_t>(j)]);
            }
        }
        if (trace.out) {
            for (int i = 0; i < population; ++i) {
                *trace.out << "reward," << trace.step << ',' << round << ',' << i << ','
                           << sets[static_cast<std::size_t>(i)].size() << '\n';
            }
        }
    }
    return sets;
}

std::vector<double> estimate_average_reward(std::span<const double> rewards, const CommGraph& graph,
                                            int rounds, const EstimationTrace& trace) {
    if (rounds < 1) {
        throw std::invalid_argument("average-reward gossip needs at least one round");
    }
    const int n = static_cast<int>(rewards.size());
    const auto sets = gossip_reward_sets(n, graph, rounds, trace);
    std::vector<double> estimates;
    estimates.reserve(sets.size());
    for (const auto& s : sets) {
        estimates.push_back(s.mean(rewards));
    }
    return estimates;
}

std::vector<CountVector> gossip_count_vectors(std::span<const Cell> positions, const VisGraph& vis,
                                              const CommGraph& comm, int rounds, const GridSpec& grid,
                                              const EstimationTrace& trace) {
    const auto n = positions.size();
    const auto s_count = static_cast<std::size_t>(grid.num_states());
    if (comm.size() != static_cast<int>(n)) {
        throw std::invalid_argument("communication graph size does not match the population");
    }
    if (vis.num_states() != grid.num_states()) {
        throw std::invalid_argument("visibility graph size does not match the grid");
    }
    if (rounds < 0) {
        throw std::invalid_argument("mean-field gossip rounds must be non-negative");
    }
    const auto occupancy = occupancy_counts(positions, grid);

    std::vector<CountVector> vectors(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& cv = vectors[i];
        cv.counts.assign(s_count, CountVector::kUnknown);
        for (int s : vis.visible_from(grid.index(positions[i]))) {
            cv.counts[static_cast<std::size_t>(s)] = occupancy[static_cast<std::size_t>(s)];
        }
    }

    for (int round = 1; round <= rounds; ++round) {
        const std::vector<CountVector> broadcast = vectors;
        for (std::size_t i = 0; i < n; ++i) {
            auto& next = vectors[i].counts;
            auto absorb = [&](const CountVector& from) {
                for (std::size_t s = 0; s < s_count; ++s) {
                    const int c = from.counts[s];
                    if (c == CountVector::kUnknown) {
                        continue;
                    }
                    if (next[s] != CountVector::kUnknown && next[s] != c) {
                        throw std::logic_error("conflicting visibility counts for state " +
                                               std::to_string(s));
                    }
                    next[s] = c;
                }
            };
            // The new vector starts empty and is filled from J = {i} u neighbours.
            next.assign(s_count, CountVector::kUnknown);
            absorb(broadcast[i]);
            for (int j : comm.neighbors(static_cast<int>(i))) {
                absorb(broadcast[static_cast<std::size_t>(j)]);
            }
        }
        if (trace.out) {
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t known = 0;
                for (std::size_t s = 0; s < s_count; ++s) {
                    known += vectors[i].known(s) ? 1 : 0;
                }
                *trace.out << "mean_field," << trace.step << ',' << round << ',' << i << ',' << known
                           << '\n';
            }
        }
    }
    return vectors;
}

MeanField complete_count_vector(const CountVector& cv, int n) {
    long counted = 0;
    long unseen = 0;
    for (int c : cv.counts) {
        if (c == CountVector::kUnknown) {
            ++unseen;
        } else {
            counted += c;
        }
    }
    if (counted > n) {
        throw std::logic_error("counted " + std::to_string(counted) + " agents in a population of " +
                               std::to_string(n));
    }
    const double total = static_cast<double>(n);
    const long uncounted = n - counted;
    const double spread =
        unseen > 0 ? static_cast<double>(uncounted) / (total * static_cast<double>(unseen)) : 0.0;
    MeanField mf;
    mf.probs.reserve(cv.counts.size());
    for (int c : cv.counts) {
        mf.probs.push_back(c == CountVector::kUnknown ? spread : static_cast<double>(c) / total);
    }
    return mf;
}

std::vector<MeanField> estimate_mean_field(std::span<const Cell> positions, const VisGraph& vis,
                                           const CommGraph& comm, int rounds, int n,
                                           const GridSpec& grid, const EstimationTrace& trace) {
    if (static_cast<std::size_t>(n) != positions.size()) {
        throw std::invalid_argument("population size does not match the number of positions");
    }
    const auto vectors = gossip_count_vectors(positions, vis, comm, rounds, grid, trace);
    std::vector<MeanField> out;
    out.reserve(vectors.size());
    for (const auto& cv : vectors) {
        out.push_back(complete_count_vector(cv, n));
    }
    return out;
}

} // namespace mfc
