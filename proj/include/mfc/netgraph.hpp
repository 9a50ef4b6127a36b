#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mfc/env.hpp"
#include "mfc/rng.hpp"

namespace mfc {

/// Broadcast radii, as fractions of the grid's maximum distance, plus i.i.d. link failures.
struct RadiusPolicy {
    double comm_radius_frac = 1.0;
    double vis_radius_frac = 1.0;
    double link_failure_prob = 0.0;

    /// Throws std::invalid_argument if any field lies outside [0, 1].
    void validate() const;

    /// No communication links and no visibility beyond an agent's own cell.
    static RadiusPolicy isolated() { return {-1.0, -1.0, 0.0}; }
    bool is_isolated() const { return comm_radius_frac < 0.0 && vis_radius_frac < 0.0; }
};

/// Undirected communication graph over agents. No self-edges.
class CommGraph {
public:
    explicit CommGraph(int n = 0);

    static CommGraph complete(int n);
    static CommGraph path(int n);

    int size() const { return n_; }
    void add_edge(int i, int j);
    bool has_edge(int i, int j) const { return adjacency_[index(i, j)] != 0; }
    std::span<const int> neighbors(int i) const { return neighbors_[static_cast<std::size_t>(i)]; }
    std::size_t edge_count() const { return edges_; }

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
    }

    int n_;
    std::size_t edges_ = 0;
    std::vector<char> adjacency_;
    std::vector<std::vector<int>> neighbors_;
};

/// Undirected visibility relation over grid states. Every state sees itself.
class VisGraph {
public:
    explicit VisGraph(int num_states = 0);

    int num_states() const { return static_cast<int>(visible_.size()); }
    void add_edge(int m, int n);
    bool has_edge(int m, int n) const;
    /// States visible from `s`, ascending, including `s`.
    std::span<const int> visible_from(int s) const { return visible_[static_cast<std::size_t>(s)]; }

private:
    std::vector<std::vector<int>> visible_;
};

/// Edge (i, j) iff i != j, the agents are within the comm radius, and the link survives
/// an independent failure draw. One draw per unordered within-radius pair, in (i < j) order.
CommGraph build_comm_graph(std::span<const Cell> positions, const RadiusPolicy& policy,
                           const GridSpec& grid, Rng& rng);

/// Edge (m, n) iff the states are within the visibility radius. Positions do not matter.
VisGraph build_vis_graph(const RadiusPolicy& policy, const GridSpec& grid);

/// Hop counts from `source` by breadth-first search; -1 for unreachable agents.
std::vector<int> hop_distances(const CommGraph& g, int source);

/// Longest shortest path; std::nullopt when the graph is disconnected.
std::optional<int> diameter(const CommGraph& g);

} // namespace mfc
