#include "mfc/netgraph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>

namespace mfc {

namespace {

void check_unit_interval(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " must lie in [0, 1], got " +
                                    std::to_string(v));
    }
}

// A negative fraction disables every link, including zero-distance ones.
bool within(int dist, double frac, int max_dist) {
    constexpr double kSlack = 1e-9;
    return frac >= 0.0 && static_cast<double>(dist) <= frac * static_cast<double>(max_dist) + kSlack;
}

} // namespace

void RadiusPolicy::validate() const {
    if (!is_isolated()) {
        check_unit_interval(comm_radius_frac, "comm_radius_frac");
        check_unit_interval(vis_radius_frac, "vis_radius_frac");
    }
    check_unit_interval(link_failure_prob, "link_failure_prob");
}

CommGraph::CommGraph(int n)
    : n_(n), adjacency_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0),
      neighbors_(static_cast<std::size_t>(n)) {}

CommGraph CommGraph::complete(int n) {
    CommGraph g(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            g.add_edge(i, j);
        }
    }
    return g;
}

CommGraph CommGraph::path(int n) {
    CommGraph g(n);
    for (int i = 0; i + 1 < n; ++i) {
        g.add_edge(i, i + 1);
    }
    return g;
}

void CommGraph::add_edge(int i, int j) {
    if (i == j) {
        throw std::invalid_argument("communication graph has no self-edges");
    }
    if (has_edge(i, j)) {
        return;
    }
    adjacency_[index(i, j)] = 1;
    adjacency_[index(j, i)] = 1;
    auto insert_sorted = [](std::vector<int>& v, int x) {
        v.insert(std::upper_bound(v.begin(), v.end(), x), x);
    };
    insert_sorted(neighbors_[static_cast<std::size_t>(i)], j);
    insert_sorted(neighbors_[static_cast<std::size_t>(j)], i);
    ++edges_;
}

VisGraph::VisGraph(int num_states) : visible_(static_cast<std::size_t>(num_states)) {
    for (int s = 0; s < num_states; ++s) {
        visible_[static_cast<std::size_t>(s)].push_back(s);
    }
}

void VisGraph::add_edge(int m, int n) {
    if (has_edge(m, n)) {
        return;
    }
    auto insert_sorted = [](std::vector<int>& v, int x) {
        v.insert(std::upper_bound(v.begin(), v.end(), x), x);
    };
    insert_sorted(visible_[static_cast<std::size_t>(m)], n);
    insert_sorted(visible_[static_cast<std::size_t>(n)], m);
}

bool VisGraph::has_edge(int m, int n) const {
    const auto& v = visible_[static_cast<std::size_t>(m)];
    return std::binary_search(v.begin(), v.end(), n);
}

CommGraph build_comm_graph(std::span<const Cell> positions, const RadiusPolicy& policy,
                           const GridSpec& grid, Rng& rng) {
    const int n = static_cast<int>(positions.size());
    CommGraph g(n);
    if (policy.comm_radius_frac < 0.0) {
        return g;
    }
    const int max_dist = grid.max_dist();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const int d = manhattan(positions[static_cast<std::size_t>(i)],
                                    positions[static_cast<std::size_t>(j)]);
            if (!within(d, policy.comm_radius_frac, max_dist)) {
                continue;
            }
            if (policy.link_failure_prob > 0.0 && bernoulli(rng, policy.link_failure_prob)) {
                continue;
            }
            g.add_edge(i, j);
        }
    }
    return g;
}

VisGraph build_vis_graph(const RadiusPolicy& policy, const GridSpec& grid) {
    const int s_count = grid.num_states();
    VisGraph g(s_count);
    if (policy.vis_radius_frac < 0.0) {
        return g;
    }
    const int max_dist = grid.max_dist();
    for (int m = 0; m < s_count; ++m) {
        for (int k = m + 1; k < s_count; ++k) {
            if (within(manhattan(grid.cell(m), grid.cell(k)), policy.vis_radius_frac, max_dist)) {
                g.add_edge(m, k);
            }
        }
    }
    return g;
}

std::vector<int> hop_distances(const CommGraph& g, int source) {
    std::vector<int> dist(static_cast<std::size_t>(g.size()), -1);
    std::deque<int> frontier{source};
    dist[static_cast<std::size_t>(source)] = 0;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop_front();
        for (int v : g.neighbors(u)) {
            if (dist[static_cast<std::size_t>(v)] < 0) {
                dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
                frontier.push_back(v);
            }
        }
    }
    return dist;
}

std::optional<int> diameter(const CommGraph& g) {
    int best = 0;
    for (int s = 0; s < g.size(); ++s) {
        for (int d : hop_distances(g, s)) {
            if (d < 0) {
                return std::nullopt;
            }
            best = std::max(best, d);
        }
    }
    return best;
}

} // namespace mfc
