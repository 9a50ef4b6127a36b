#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mfc {

/// A grid cell. Agents' states are cells.
struct Cell {
    int row = 0;
    int col = 0;

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Manhattan distance between two cells.
inline int manhattan(Cell a, Cell b) {
    const int dr = a.row > b.row ? a.row - b.row : b.row - a.row;
    const int dc = a.col > b.col ? a.col - b.col : b.col - a.col;
    return dr + dc;
}

/// Rectangular grid with row-major state indexing.
class GridSpec {
public:
    GridSpec(int height, int width);

    int height() const { return height_; }
    int width() const { return width_; }
    int num_states() const { return height_ * width_; }
    /// Distance between opposite corners under the Manhattan metric.
    int max_dist() const { return (height_ - 1) + (width_ - 1); }

    bool contains(Cell c) const {
        return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
    }
    int index(Cell c) const { return c.row * width_ + c.col; }
    Cell cell(int index) const { return {index / width_, index % width_}; }
    Cell centre() const { return {height_ / 2, width_ / 2}; }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    int height_;
    int width_;
};

enum class Action : std::uint8_t { Up, Down, Left, Right, Stay };

inline constexpr int kNumActions = 5;
inline constexpr std::array<Action, kNumActions> kAllActions{
    Action::Up, Action::Down, Action::Left, Action::Right, Action::Stay};

inline constexpr bool is_stationary(Action a) { return a == Action::Stay; }
inline constexpr int action_index(Action a) { return static_cast<int>(a); }
inline constexpr Action action_from_index(int i) { return static_cast<Action>(i); }

/// Moves one cell in the direction of `a`; moves off the edge leave the agent in place.
Cell transition(Cell s, Action a, const GridSpec& grid);

/// Fraction of the population in each cell (row-major), true or estimated.
struct MeanField {
    std::vector<double> probs;

    double operator[](std::size_t s) const { return probs[s]; }
    std::size_t size() const { return probs.size(); }
    friend bool operator==(const MeanField&, const MeanField&) = default;
};

std::vector<int> occupancy_counts(std::span<const Cell> states, const GridSpec& grid);

/// Empirical distribution of `states`: entry s is (agents at s) / N.
MeanField empirical_mean_field(std::span<const Cell> states, const GridSpec& grid);

enum class GameKind { Cluster, TargetSelection, Disperse, TargetCoverage, BeachBar, ShapeFormation };

inline constexpr std::array<GameKind, 6> kAllGames{
    GameKind::Cluster,        GameKind::TargetSelection, GameKind::Disperse,
    GameKind::TargetCoverage, GameKind::BeachBar,        GameKind::ShapeFormation};

std::string_view to_string(GameKind g);
std::optional<GameKind> parse_game(std::string_view name);

/// Cluster and TargetSelection reward alignment; the other four reward diversity.
inline constexpr bool is_coordination_game(GameKind g) {
    return g == GameKind::Cluster || g == GameKind::TargetSelection;
}

/// A game together with its target geometry on a particular grid.
struct Game {
    GameKind kind = GameKind::Cluster;
    /// Corner targets for the target games, the bar for BeachBar, the ring centre for ShapeFormation.
    std::vector<Cell> targets;
    int ring_radius = 0;
    /// Largest distance any cell can be from the bar (BeachBar only).
    int bar_max_dist = 0;

    static Game make(GameKind kind, const GridSpec& grid);
};

struct RewardRange {
    double lo = 0.0;
    double hi = 0.0;
};

/// Analytic extrema of a game's raw reward for a population of size n.
RewardRange reward_range(const Game& game, const GridSpec& grid, int n);

/// Raw (unnormalised) reward for an agent at `s` taking `a` in a population of size n.
/// Throws std::domain_error if mf[s] == 0.
double raw_reward(const Game& game, Cell s, Action a, const MeanField& mf, const GridSpec& grid,
                  int n);

/// Affine map of `raw` from the game's range onto [0, 1].
/// Throws std::range_error if `raw` falls outside the range by more than 1e-9.
double normalize_reward(const Game& game, double raw, const GridSpec& grid, int n);

/// Game, grid and population size bundled, with the normalisation range precomputed.
class RewardModel {
public:
    RewardModel(Game game, GridSpec grid, int n);

    double raw(Cell s, Action a, const MeanField& mf) const;
    double normalized(Cell s, Action a, const MeanField& mf) const;

    const Game& game() const { return game_; }
    const RewardRange& range() const { return range_; }

private:
    Game game_;
    GridSpec grid_;
    int n_;
    RewardRange range_;
};

} // namespace mfc
