#include "csg/gridworld/gridworld.hpp"

#include <random>
#include <stdexcept>

namespace csg::grid {

int TileSymbol::index() const {
  switch (kind) {
    case TileKind::unseen: return 0;
    case TileKind::empty: return 1;
    case TileKind::wall: return 2;
    case TileKind::key: return 3;
    case TileKind::door:
      switch (door) {
        case DoorState::open: return 4;
        case DoorState::closed: return 5;
        case DoorState::locked: return 6;
        case DoorState::not_applicable: break;
      }
      break;
    case TileKind::goal: return 7;
  }
  throw std::logic_error("TileSymbol::index: symbol outside the vocabulary");
}

TileSymbol TileSymbol::from_index(int index) {
  switch (index) {
    case 0: return unseen();
    case 1: return empty();
    case 2: return wall();
    case 3: return key();
    case 4: return door_with(DoorState::open);
    case 5: return door_with(DoorState::closed);
    case 6: return door_with(DoorState::locked);
    case 7: return goal();
    default: throw std::out_of_range("TileSymbol::from_index: " + std::to_string(index));
  }
}

bool TileSymbol::valid() const {
  const bool yellow = kind == TileKind::key || kind == TileKind::door;
  const bool green = kind == TileKind::goal;
  if (yellow != (color == TileColor::yellow)) return false;
  if (green != (color == TileColor::green)) return false;
  if ((kind == TileKind::door) != (door != DoorState::not_applicable)) return false;
  return true;
}

bool TileSymbol::transparent() const {
  if (kind == TileKind::wall) return false;
  if (kind == TileKind::door) return door == DoorState::open;
  return true;
}

bool TileSymbol::walkable() const {
  switch (kind) {
    case TileKind::empty:
    case TileKind::goal: return true;
    case TileKind::door: return door == DoorState::open;
    default: return false;
  }
}

std::string_view tile_name(const TileSymbol& t) {
  static constexpr std::string_view kNames[kVocabSize] = {
      "unseen cell", "empty cell", "wall", "yellow key", "open yellow door",
      "closed yellow door", "locked yellow door", "green goal"};
  return kNames[t.index()];
}

std::string_view action_name(Action a) {
  static constexpr std::string_view kNames[kNumActions] = {
      "turn_left", "turn_right", "move_forward", "pickup", "drop", "toggle"};
  return kNames[static_cast<int>(a)];
}

Pos forward_vector(Direction d) {
  switch (d) {
    case Direction::north: return {-1, 0};
    case Direction::east: return {0, 1};
    case Direction::south: return {1, 0};
    case Direction::west: return {0, -1};
  }
  return {0, 0};
}

Direction turn_left(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 3) % 4); }
Direction turn_right(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 1) % 4); }

Pos GridState::front() const {
  const Pos f = forward_vector(agent_dir);
  return {agent_pos.row + f.row, agent_pos.col + f.col};
}

std::vector<int> Observation::indices() const {
  std::vector<int> out(view.size());
  for (std::size_t i = 0; i < view.size(); ++i) out[i] = view[i].index();
  return out;
}

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Pos random_empty_cell(std::mt19937_64& rng, const GridState& s, int col_lo, int col_hi) {
  for (;;) {
    const Pos p{uniform(rng, 1, s.size - 2), uniform(rng, col_lo, col_hi)};
    if (s.at(p) == TileSymbol::empty()) return p;
  }
}

}  // namespace

GridState generate(std::uint64_t layout_seed, int n) {
  if (n < 5) throw std::invalid_argument("generate: grid size must be >= 5, got " + std::to_string(n));
  std::mt19937_64 rng(layout_seed);
  GridState s;
  s.size = n;
  s.layout_seed = layout_seed;
  s.t = 0;
  s.t_max = default_step_limit(n);
  s.tiles.assign(static_cast<std::size_t>(n * n), TileSymbol::empty());
  for (int i = 0; i < n; ++i) {
    s.at({0, i}) = TileSymbol::wall();
    s.at({n - 1, i}) = TileSymbol::wall();
    s.at({i, 0}) = TileSymbol::wall();
    s.at({i, n - 1}) = TileSymbol::wall();
  }

  const int split = uniform(rng, 2, n - 3);
  for (int r = 1; r < n - 1; ++r) s.at({r, split}) = TileSymbol::wall();
  const int door_row = uniform(rng, 1, n - 2);
  s.at({door_row, split}) = TileSymbol::door_with(DoorState::locked);

  const Pos key = random_empty_cell(rng, s, 1, split - 1);
  s.at(key) = TileSymbol::key();
  s.agent_pos = random_empty_cell(rng, s, 1, split - 1);
  s.agent_dir = static_cast<Direction>(uniform(rng, 0, 3));
  const Pos goal = random_empty_cell(rng, s, split + 1, n - 2);
  s.at(goal) = TileSymbol::goal();
  return s;
}

StepResult step(const GridState& state, Action action) {
  if (state.done) throw std::logic_error("step: episode already terminated");
  StepResult out{state, false, 0.0, false};
  GridState& s = out.state;
  s.t += 1;

  const Pos fwd = s.front();
  const bool fwd_ok = s.in_bounds(fwd);
  switch (action) {
    case Action::turn_left: s.agent_dir = turn_left(s.agent_dir); break;
    case Action::turn_right: s.agent_dir = turn_right(s.agent_dir); break;
    case Action::move_forward:
      if (fwd_ok && s.at(fwd).walkable()) {
        s.agent_pos = fwd;
        if (s.at(fwd).kind == TileKind::goal) {
          out.terminated = true;
          out.success = true;
          out.reward = 1.0 - 0.9 * static_cast<double>(s.t) / static_cast<double>(s.t_max);
        }
      }
      break;
    case Action::pickup:
      if (fwd_ok && !s.carried && s.at(fwd).kind == TileKind::key) {
        s.carried = s.at(fwd);
        s.at(fwd) = TileSymbol::empty();
      }
      break;
    case Action::drop:
      if (fwd_ok && s.carried && s.at(fwd) == TileSymbol::empty()) {
        s.at(fwd) = *s.carried;
        s.carried.reset();
      }
      break;
    case Action::toggle:
      if (fwd_ok && s.at(fwd).kind == TileKind::door) {
        TileSymbol& door = s.at(fwd);
        if (door.door == DoorState::locked) {
          if (s.carried && s.carried->kind == TileKind::key) door.door = DoorState::open;
        } else {
          door.door = door.door == DoorState::open ? DoorState::closed : DoorState::open;
        }
      }
      break;
  }

  if (s.t >= s.t_max) out.terminated = true;
  s.done = out.terminated;
  return out;
}

namespace {

// World position of egocentric cell (row, col).
Pos view_to_world(const GridState& s, int m, int row, int col) {
  const Pos f = forward_vector(s.agent_dir);
  const Pos r = forward_vector(turn_right(s.agent_dir));
  const int ahead = (m - 1) - col;
  const int right = row - m / 2;
  return {s.agent_pos.row + ahead * f.row + right * r.row, s.agent_pos.col + ahead * f.col + right * r.col};
}

void check_view_size(int m) {
  if (m < 3 || m % 2 == 0) throw std::invalid_argument("observe: view size must be odd and >= 3, got " + std::to_string(m));
}

}  // namespace

std::vector<bool> visibility_mask(const GridState& s, int m) {
  check_view_size(m);
  const auto idx = [m](int row, int col) { return static_cast<std::size_t>(row * m + col); };
  std::vector<bool> see(static_cast<std::size_t>(m * m));
  for (int row = 0; row < m; ++row)
    for (int col = 0; col < m; ++col) {
      const Pos w = view_to_world(s, m, row, col);
      see[idx(row, col)] = s.in_bounds(w) && s.at(w).transparent();
    }

  // Neighbour propagation: sweep away from the agent one column at a time,
  // left-to-right then right-to-left within each column.
  std::vector<bool> mask(static_cast<std::size_t>(m * m), false);
  mask[idx(m / 2, m - 1)] = true;
  for (int col = m - 1; col >= 0; --col) {
    for (int row = 0; row < m - 1; ++row) {
      if (!mask[idx(row, col)] || !see[idx(row, col)]) continue;
      mask[idx(row + 1, col)] = true;
      if (col > 0) {
        mask[idx(row + 1, col - 1)] = true;
        mask[idx(row, col - 1)] = true;
      }
    }
    for (int row = m - 1; row > 0; --row) {
      if (!mask[idx(row, col)] || !see[idx(row, col)]) continue;
      mask[idx(row - 1, col)] = true;
      if (col > 0) {
        mask[idx(row - 1, col - 1)] = true;
        mask[idx(row, col - 1)] = true;
      }
    }
  }
  return mask;
}

Observation observe(const GridState& s, int m) {
  const std::vector<bool> mask = visibility_mask(s, m);
  Observation obs;
  obs.size = m;
  obs.view.assign(static_cast<std::size_t>(m * m), TileSymbol::unseen());
  for (int row = 0; row < m; ++row)
    for (int col = 0; col < m; ++col) {
      const std::size_t i = static_cast<std::size_t>(row * m + col);
      if (!mask[i]) continue;
      const Pos w = view_to_world(s, m, row, col);
      if (s.in_bounds(w)) obs.view[i] = s.at(w);
    }
  obs.view[static_cast<std::size_t>(obs.agent_cell())] = s.carried ? *s.carried : s.at(s.agent_pos);
  return obs;
}

std::string render_ascii(const GridState& s) {
  std::string out;
  out.reserve(static_cast<std::size_t>(s.size * (s.size + 1)));
  for (int r = 0; r < s.size; ++r) {
    for (int c = 0; c < s.size; ++c) {
      const Pos p{r, c};
      char ch = '?';
      if (p == s.agent_pos) {
        static constexpr char kGlyph[4] = {'^', '>', 'v', '<'};
        ch = kGlyph[static_cast<int>(s.agent_dir)];
      } else {
        static constexpr char kTile[kVocabSize] = {' ', '.', '#', 'K', 'O', 'C', 'L', 'G'};
        ch = kTile[s.at(p).index()];
      }
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

int default_view_size(int n) { return n >= 10 ? 9 : 5; }

}  // namespace csg::grid
