#ifndef CSG_GRIDWORLD_GRIDWORLD_HPP_
#define CSG_GRIDWORLD_GRIDWORLD_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace csg::grid {

enum class TileKind : std::uint8_t { unseen, empty, wall, key, door, goal };
enum class TileColor : std::uint8_t { none, yellow, green };
enum class DoorState : std::uint8_t { not_applicable, open, closed, locked };

inline constexpr int kVocabSize = 8;

// One cell of the world or of an observation. Only the eight combinations
// listed in the vocabulary are constructible through the factories.
struct TileSymbol {
  TileKind kind = TileKind::empty;
  TileColor color = TileColor::none;
  DoorState door = DoorState::not_applicable;

  static constexpr TileSymbol unseen() { return {TileKind::unseen, TileColor::none, DoorState::not_applicable}; }
  static constexpr TileSymbol empty() { return {TileKind::empty, TileColor::none, DoorState::not_applicable}; }
  static constexpr TileSymbol wall() { return {TileKind::wall, TileColor::none, DoorState::not_applicable}; }
  static constexpr TileSymbol key() { return {TileKind::key, TileColor::yellow, DoorState::not_applicable}; }
  static constexpr TileSymbol door_with(DoorState s) { return {TileKind::door, TileColor::yellow, s}; }
  static constexpr TileSymbol goal() { return {TileKind::goal, TileColor::green, DoorState::not_applicable}; }

  // Stable vocabulary index in [0, kVocabSize):
  // unseen, empty, wall, key, door(open), door(closed), door(locked), goal.
  int index() const;
  static TileSymbol from_index(int index);

  bool valid() const;
  // Whether sight passes through this tile.
  bool transparent() const;
  // Whether the agent may stand on this tile.
  bool walkable() const;

  friend constexpr bool operator==(const TileSymbol&, const TileSymbol&) = default;
};

std::string_view tile_name(const TileSymbol& t);

enum class Direction : std::uint8_t { north, east, south, west };

enum class Action : std::uint8_t { turn_left, turn_right, move_forward, pickup, drop, toggle };
inline constexpr int kNumActions = 6;

std::string_view action_name(Action a);

struct Pos {
  int row = 0;
  int col = 0;
  friend constexpr bool operator==(const Pos&, const Pos&) = default;
};

Pos forward_vector(Direction d);
Direction turn_left(Direction d);
Direction turn_right(Direction d);

struct GridState {
  int size = 0;  // N; the grid is size x size including the outer wall
  std::vector<TileSymbol> tiles;
  Pos agent_pos;
  Direction agent_dir = Direction::north;
  std::optional<TileSymbol> carried;
  int t = 0;
  int t_max = 0;
  std::uint64_t layout_seed = 0;
  bool done = false;

  bool in_bounds(Pos p) const { return p.row >= 0 && p.col >= 0 && p.row < size && p.col < size; }
  const TileSymbol& at(Pos p) const { return tiles[static_cast<std::size_t>(p.row * size + p.col)]; }
  TileSymbol& at(Pos p) { return tiles[static_cast<std::size_t>(p.row * size + p.col)]; }
  Pos front() const;

  friend bool operator==(const GridState&, const GridState&) = default;
};

struct StepResult {
  GridState state;
  bool terminated = false;
  double reward = 0.0;
  bool success = false;  // terminated by entering the goal
};

// Egocentric view: row-major M x M. The agent sits at (M/2, M-1) (0-based)
// and faces towards column 0.
struct Observation {
  int size = 0;
  std::vector<TileSymbol> view;

  const TileSymbol& at(int row, int col) const { return view[static_cast<std::size_t>(row * size + col)]; }
  int agent_cell() const { return (size / 2) * size + (size - 1); }
  int front_cell() const { return agent_cell() - 1; }
  std::vector<int> indices() const;

  friend bool operator==(const Observation&, const Observation&) = default;
};

// Layout is a pure function of (layout_seed, n). Throws std::invalid_argument
// for n < 5.
GridState generate(std::uint64_t layout_seed, int n);

// Advances one step. Invalid actions are no-ops that still cost a step.
// Throws std::logic_error when the episode is already over.
StepResult step(const GridState& state, Action action);

// Throws std::invalid_argument unless m is odd and >= 3.
Observation observe(const GridState& state, int m);

// Per-cell visibility mask of the egocentric window (true = visible),
// before the agent-cell substitution.
std::vector<bool> visibility_mask(const GridState& state, int m);

std::string render_ascii(const GridState& state);

// View size used for a given grid size: 9 for n >= 10, otherwise 5.
int default_view_size(int n);

inline int default_step_limit(int n) { return 10 * n * n; }

}  // namespace csg::grid

#endif  // CSG_GRIDWORLD_GRIDWORLD_HPP_
