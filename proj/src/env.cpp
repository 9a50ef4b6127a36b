#include "mfc/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mfc {

GridSpec::GridSpec(int height, int width) : height_(height), width_(width) {
    if (height < 1 || width < 1) {
        throw std::invalid_argument("grid dimensions must be at least 1x1, got " +
                                    std::to_string(height) + "x" + std::to_string(width));
    }
}

Cell transition(Cell s, Action a, const GridSpec& grid) {
    Cell next = s;
    switch (a) {
    case Action::Up: next.row -= 1; break;
    case Action::Down: next.row += 1; break;
    case Action::Left: next.col -= 1; break;
    case Action::Right: next.col += 1; break;
    case Action::Stay: break;
    }
    return grid.contains(next) ? next : s;
}

std::vector<int> occupancy_counts(std::span<const Cell> states, const GridSpec& grid) {
    std::vector<int> counts(static_cast<std::size_t>(grid.num_states()), 0);
    for (const Cell& c : states) {
        ++counts[static_cast<std::size_t>(grid.index(c))];
    }
    return counts;
}

MeanField empirical_mean_field(std::span<const Cell> states, const GridSpec& grid) {
    if (states.empty()) {
        throw std::invalid_argument("empirical_mean_field needs at least one agent");
    }
    const auto counts = occupancy_counts(states, grid);
    const double n = static_cast<double>(states.size());
    MeanField mf;
    mf.probs.reserve(counts.size());
    for (int c : counts) {
        mf.probs.push_back(static_cast<double>(c) / n);
    }
    return mf;
}

std::string_view to_string(GameKind g) {
    switch (g) {
    case GameKind::Cluster: return "cluster";
    case GameKind::TargetSelection: return "target_selection";
    case GameKind::Disperse: return "disperse";
    case GameKind::TargetCoverage: return "target_coverage";
    case GameKind::BeachBar: return "beach_bar";
    case GameKind::ShapeFormation: return "shape_formation";
    }
    return "?";
}

std::optional<GameKind> parse_game(std::string_view name) {
    for (GameKind g : kAllGames) {
        if (to_string(g) == name) {
            return g;
        }
    }
    return std::nullopt;
}

Game Game::make(GameKind kind, const GridSpec& grid) {
    Game game;
    game.kind = kind;
    const int h = grid.height() - 1;
    const int w = grid.width() - 1;
    switch (kind) {
    case GameKind::TargetSelection:
    case GameKind::TargetCoverage:
        game.targets = {{0, 0}, {0, w}, {h, 0}, {h, w}};
        break;
    case GameKind::BeachBar: {
        const Cell bar = grid.centre();
        game.targets = {bar};
        for (Cell corner : {Cell{0, 0}, Cell{0, w}, Cell{h, 0}, Cell{h, w}}) {
            game.bar_max_dist = std::max(game.bar_max_dist, manhattan(corner, bar));
        }
        break;
    }
    case GameKind::ShapeFormation:
        game.targets = {grid.centre()};
        game.ring_radius = 3;
        break;
    case GameKind::Cluster:
    case GameKind::Disperse:
        break;
    }
    return game;
}

RewardRange reward_range(const Game& game, const GridSpec& /*grid*/, int n) {
    // Written as -log(1/n) so the extremes match raw rewards computed from mass 1/n bit for bit.
    const double log_n = -std::log(1.0 / static_cast<double>(n));
    switch (game.kind) {
    case GameKind::Cluster: return {std::log(1.0 / static_cast<double>(n)), 0.0};
    case GameKind::TargetSelection: return {-1.0, 1.0};
    case GameKind::Disperse:
    case GameKind::TargetCoverage:
    case GameKind::ShapeFormation: return {-1.0, log_n};
    case GameKind::BeachBar: return {-1.0, static_cast<double>(game.bar_max_dist) + log_n};
    }
    return {};
}

namespace {

constexpr double kPenalty = -1.0;

bool on_any_target(const Game& game, Cell s) {
    return std::any_of(game.targets.begin(), game.targets.end(),
                       [&](Cell t) { return manhattan(s, t) == 0; });
}

} // namespace

double raw_reward(const Game& game, Cell s, Action a, const MeanField& mf, const GridSpec& grid,
                  int n) {
    const double mass = mf[static_cast<std::size_t>(grid.index(s))];
    if (!(mass > 0.0)) {
        throw std::domain_error("mean field has no mass at the acting agent's cell (" +
                                std::to_string(s.row) + "," + std::to_string(s.col) + ")");
    }
    const double crowding = -std::log(mass);
    const bool stationary = is_stationary(a);

    switch (game.kind) {
    case GameKind::Cluster:
        return std::log(mass);
    case GameKind::TargetSelection:
        // r_targ(r_coord(mass)): on a target and sharing it with at least one other agent.
        return (on_any_target(game, s) && mass > 1.0 / static_cast<double>(n)) ? mass : kPenalty;
    case GameKind::Disperse:
        return stationary ? crowding : kPenalty;
    case GameKind::TargetCoverage:
        return (stationary && on_any_target(game, s)) ? crowding : kPenalty;
    case GameKind::BeachBar:
        return stationary ? static_cast<double>(game.bar_max_dist - manhattan(s, game.targets.front())) +
                                crowding
                          : kPenalty;
    case GameKind::ShapeFormation:
        return (stationary && manhattan(s, game.targets.front()) == game.ring_radius) ? crowding
                                                                                      : kPenalty;
    }
    return kPenalty;
}

double normalize_reward(const Game& game, double raw, const GridSpec& grid, int n) {
    const RewardRange r = reward_range(game, grid, n);
    constexpr double kSlack = 1e-9;
    if (raw < r.lo - kSlack || raw > r.hi + kSlack) {
        throw std::range_error("raw reward " + std::to_string(raw) + " outside [" +
                               std::to_string(r.lo) + ", " + std::to_string(r.hi) + "] for game " +
                               std::string(to_string(game.kind)));
    }
    if (r.hi <= r.lo) {
        return 1.0; // single-agent Cluster: every outcome is the maximum
    }
    return std::clamp((raw - r.lo) / (r.hi - r.lo), 0.0, 1.0);
}

RewardModel::RewardModel(Game game, GridSpec grid, int n)
    : game_(std::move(game)), grid_(grid), n_(n), range_(reward_range(game_, grid_, n)) {
    if (n < 1) {
        throw std::invalid_argument("population size must be at least 1");
    }
}

double RewardModel::raw(Cell s, Action a, const MeanField& mf) const {
    return raw_reward(game_, s, a, mf, grid_, n_);
}

double RewardModel::normalized(Cell s, Action a, const MeanField& mf) const {
    return normalize_reward(game_, raw(s, a, mf), grid_, n_);
}

} // namespace mfc
