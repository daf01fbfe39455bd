#include "psynth/benchmarks.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace psynth {

namespace {

constexpr int kDx[4] = {0, 1, 0, -1};  // north, east, south, west
constexpr int kDy[4] = {1, 0, -1, 0};
// Neighbour order for observation bits: N, NE, E, SE, S, SW, W, NW.
constexpr int kNx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kNy[8] = {1, 1, 0, -1, -1, -1, 0, 1};

const std::vector<std::string> kGridActions = {"north", "east", "south", "west"};

// Accumulates successor probabilities, merging duplicate targets.
class RowBuilder {
 public:
  void add(StateId s, double p) { probs_[s] += p; }
  std::vector<Transition> take() {
    std::vector<Transition> out;
    out.reserve(probs_.size());
    for (auto [s, p] : probs_) out.push_back({s, p});
    probs_.clear();
    return out;
  }

 private:
  std::map<StateId, double> probs_;
};

struct Grid {
  int c;
  std::vector<char> blocked;  // static obstacles

  bool inside(Cell p) const { return p.x >= 0 && p.y >= 0 && p.x < c && p.y < c; }
  bool wall(Cell p) const { return inside(p) && blocked[p.y * c + p.x]; }
  int index(Cell p) const { return p.y * c + p.x; }
};

Grid make_grid(const GridConfig& cfg) {
  Grid g{cfg.size, std::vector<char>(static_cast<std::size_t>(cfg.size * cfg.size), 0)};
  for (Cell o : cfg.static_obstacles.value_or(std::vector<Cell>{})) g.blocked[g.index(o)] = 1;
  return g;
}

Cell step(Cell p, int dir) { return {p.x + kDx[dir], p.y + kDy[dir]}; }

void absorbing(Mdp& m, StateId s) {
  m.choices[s].clear();
  for (ActionId a = 0; a < m.num_actions(); ++a) m.choices[s].push_back({a, {{s, 1.0}}, 0.0});
}

// Uniform start over every state except the goal.
void uniform_start(Mdp& m, StateId goal) {
  const double p = 1.0 / static_cast<double>(m.num_states() - 1);
  m.initial_distribution.clear();
  for (StateId s = 0; s < m.num_states(); ++s)
    if (s != goal) m.initial_distribution.push_back({s, p});
}

Pomdp navigation(const GridConfig& cfg) {
  const Grid g = make_grid(cfg);
  const int c = cfg.size;
  const Cell goal = *cfg.landmark_a;
  std::vector<Cell> free;
  for (int y = 0; y < c; ++y)
    for (int x = 0; x < c; ++x)
      if (!g.blocked[g.index({x, y})]) free.push_back({x, y});

  std::map<std::pair<int, int>, StateId> id;  // (agent cell, obstacle cell) -> state
  std::vector<std::pair<Cell, Cell>> pos;
  for (Cell a : free) {
    if (a == goal) continue;
    for (Cell o : free) {
      if (o == a) continue;
      id[{g.index(a), g.index(o)}] = pos.size();
      pos.push_back({a, o});
    }
  }
  const StateId goal_state = pos.size();
  const StateId crash = goal_state + 1;

  Pomdp m;
  m.name = "navigation" + std::to_string(c);
  m.actions = kGridActions;
  m.choices.resize(crash + 1);
  m.observation.resize(crash + 1);
  m.num_observations = 256;

  auto observe = [&](Cell a, std::optional<Cell> o) {
    ObsId z = 0;
    for (int i = 0; i < 8; ++i) {
      const Cell n{a.x + kNx[i], a.y + kNy[i]};
      if (!g.inside(n) || g.wall(n) || (o && n == *o)) z |= ObsId{1} << i;
    }
    return z;
  };

  RowBuilder row;
  for (StateId s = 0; s < pos.size(); ++s) {
    const auto [a, o] = pos[s];
    m.observation[s] = observe(a, o);
    for (int dir = 0; dir < 4; ++dir) {
      Cell na = step(a, dir);
      if (!g.inside(na)) na = a;
      if (g.wall(na) || na == o) {
        row.add(crash, 1.0);
      } else if (na == goal) {
        row.add(goal_state, 1.0);
      } else {
        for (int od = 0; od < 4; ++od) {
          Cell no = step(o, od);
          if (!g.inside(no) || g.wall(no)) no = o;
          if (no == na)
            row.add(crash, 0.25);
          else
            row.add(id.at({g.index(na), g.index(no)}), 0.25);
        }
      }
      m.choices[s].push_back({static_cast<ActionId>(dir), row.take(), 1.0});
    }
  }
  absorbing(m, goal_state);
  absorbing(m, crash);
  m.observation[goal_state] = observe(goal, std::nullopt);
  m.observation[crash] = 255;
  m.labels["A"] = {goal_state};
  m.labels["X"] = {crash};
  const Cell start{0, 0};
  const Cell obstacle_start{c - 1, 0};
  m.initial = id.at({g.index(start), g.index(obstacle_start)});
  return m;
}

// Delivery and Slippery share the single-agent layout.
Pomdp landmark_grid(const GridConfig& cfg, bool slippery) {
  const Grid g = make_grid(cfg);
  const int c = cfg.size;
  const Cell a_cell = *cfg.landmark_a, b_cell = *cfg.landmark_b;
  std::vector<int> id(static_cast<std::size_t>(c * c), -1);
  std::vector<Cell> cells;
  for (int y = 0; y < c; ++y)
    for (int x = 0; x < c; ++x)
      if (!g.blocked[g.index({x, y})]) {
        id[g.index({x, y})] = static_cast<int>(cells.size());
        cells.push_back({x, y});
      }
  const bool has_crash = slippery && !g.blocked.empty() &&
                         std::any_of(g.blocked.begin(), g.blocked.end(), [](char b) { return b; });
  const StateId crash = cells.size();
  const std::size_t n = cells.size() + (has_crash ? 1 : 0);

  Pomdp m;
  m.name = std::string(slippery ? "slippery" : "delivery") + std::to_string(c);
  m.actions = kGridActions;
  m.choices.resize(n);
  m.observation.resize(n);
  m.num_observations = 256;

  auto adjacent = [&](Cell p, Cell q) {
    return std::max(std::abs(p.x - q.x), std::abs(p.y - q.y)) == 1;
  };
  RowBuilder row;
  for (StateId s = 0; s < cells.size(); ++s) {
    const Cell p = cells[s];
    ObsId z = 0;
    for (int d = 0; d < 4; ++d) {
      const Cell q = step(p, d);
      if (!g.inside(q) || g.wall(q)) z |= ObsId{1} << d;
    }
    if (p == a_cell) z |= 1u << 4;
    if (p == b_cell) z |= 1u << 5;
    if (adjacent(p, a_cell)) z |= 1u << 6;
    if (adjacent(p, b_cell)) z |= 1u << 7;
    m.observation[s] = z;

    for (int dir = 0; dir < 4; ++dir) {
      auto land = [&](int d, double prob) {
        Cell q = step(p, d);
        if (!g.inside(q)) q = p;
        if (g.wall(q))
          row.add(crash, prob);
        else
          row.add(static_cast<StateId>(id[g.index(q)]), prob);
      };
      if (slippery) {
        land(dir, 1.0 - 2.0 * cfg.slip);
        land((dir + 1) % 4, cfg.slip);
        land((dir + 3) % 4, cfg.slip);
      } else {
        land(dir, 1.0);
      }
      m.choices[s].push_back({static_cast<ActionId>(dir), row.take(), 1.0});
    }
  }
  if (has_crash) {
    absorbing(m, crash);
    m.observation[crash] = 255;
    m.labels["X"] = {crash};
  } else if (slippery) {
    m.labels["X"] = {};
  }
  m.labels["A"] = {static_cast<StateId>(id[g.index(a_cell)])};
  m.labels["B"] = {static_cast<StateId>(id[g.index(b_cell)])};
  m.initial = static_cast<StateId>(id[g.index({0, c - 1})]);
  return m;
}

Pomdp maze(const GridConfig& cfg) {
  const int c = cfg.size;
  // Top row: ids 0..4. Row r in 1..c+1: ids 5 + 3(r-1) + {0,1,2} for columns 0,2,4.
  const std::size_t n = static_cast<std::size_t>(3 * c + 8);
  const StateId goal = static_cast<StateId>(5 + 3 * c + 1);
  auto cell_id = [&](int row, int col) -> int {
    if (row < 0) return -1;
    if (row == 0) return (col >= 0 && col <= 4) ? col : -1;
    if (row > c + 1 || (col != 0 && col != 2 && col != 4)) return -1;
    return 5 + 3 * (row - 1) + col / 2;
  };
  std::vector<std::pair<int, int>> where(n);
  for (int col = 0; col < 5; ++col) where[static_cast<std::size_t>(col)] = {0, col};
  for (int row = 1; row <= c + 1; ++row)
    for (int col = 0; col <= 4; col += 2) where[static_cast<std::size_t>(cell_id(row, col))] = {row, col};

  Pomdp m;
  m.name = "maze" + std::to_string(c);
  m.actions = kGridActions;
  m.choices.resize(n);
  m.observation.resize(n);
  m.num_observations = 7;
  for (StateId s = 0; s < n; ++s) {
    const auto [row, col] = where[s];
    if (s == goal) {
      m.observation[s] = 6;
      continue;
    }
    if (row == 0)
      m.observation[s] = col == 0 ? 0 : col == 4 ? 3 : col == 2 ? 2 : 1;
    else if (row <= c)
      m.observation[s] = 4;
    else
      m.observation[s] = 5;
    for (int dir = 0; dir < 4; ++dir) {
      // Rows grow southwards here, so north is row - 1.
      const int nrow = row - kDy[dir];
      const int ncol = col + (row == 0 ? kDx[dir] : 0);
      int target = (row > 0 && kDx[dir] != 0) ? -1 : cell_id(nrow, ncol);
      if (target < 0) target = static_cast<int>(s);
      m.choices[s].push_back({static_cast<ActionId>(dir), {{static_cast<StateId>(target), 1.0}}, 1.0});
    }
  }
  absorbing(m, goal);
  m.labels["goal"] = {goal};
  // Landmarks for hand-built memory updates.
  m.labels["west_end"] = {0};
  m.labels["centre"] = {2};
  m.labels["east_end"] = {4};
  m.labels["dead_end"] = {static_cast<StateId>(cell_id(c + 1, 0)), static_cast<StateId>(cell_id(c + 1, 4))};
  m.initial = 0;
  uniform_start(m, goal);
  return m;
}

Pomdp grid(const GridConfig& cfg) {
  const int c = cfg.size;
  const std::size_t n = static_cast<std::size_t>(c * c);
  Pomdp m;
  m.name = "grid" + std::to_string(c);
  m.actions = kGridActions;
  m.choices.resize(n);
  m.observation.assign(n, 0);
  m.num_observations = 2;
  const StateId goal = n - 1;
  for (StateId s = 0; s < n; ++s) {
    if (s == goal) continue;
    const Cell p{static_cast<int>(s) % c, static_cast<int>(s) / c};
    for (int dir = 0; dir < 4; ++dir) {
      Cell q = step(p, dir);
      if (q.x < 0 || q.y < 0 || q.x >= c || q.y >= c) q = p;
      m.choices[s].push_back({static_cast<ActionId>(dir), {{static_cast<StateId>(q.y * c + q.x), 1.0}}, 1.0});
    }
  }
  absorbing(m, goal);
  m.observation[goal] = 1;
  m.labels["goal"] = {goal};
  m.initial = 0;
  uniform_start(m, goal);
  return m;
}

Pomdp rocksample(const GridConfig& cfg) {
  const int n = cfg.size, b = cfg.rocks;
  const auto rocks = rock_positions(n, b);
  const std::size_t masks = std::size_t{1} << b;
  const std::size_t cells = static_cast<std::size_t>(n * n);
  const StateId terminal = cells * masks;
  auto sid = [&](Cell p, std::size_t mask) { return static_cast<StateId>(p.y * n + p.x) * masks + mask; };

  Pomdp m;
  m.name = "rocksample" + std::to_string(n) + "_" + std::to_string(b);
  m.actions = kGridActions;
  m.actions.push_back("sample");
  for (int i = 0; i < b; ++i) m.actions.push_back("check" + std::to_string(i + 1));
  m.choices.resize(terminal + 1);
  m.observation.assign(terminal + 1, 0);
  m.num_observations = 2;

  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      for (std::size_t mask = 0; mask < masks; ++mask) {
        const Cell p{x, y};
        const StateId s = sid(p, mask);
        int rock_here = -1;
        for (int i = 0; i < b; ++i)
          if (rocks[static_cast<std::size_t>(i)] == p) rock_here = i;
        if (rock_here >= 0 && (mask >> rock_here & 1u)) m.observation[s] = 1;
        for (int dir = 0; dir < 4; ++dir) {
          Cell q = step(p, dir);
          if (q.x >= n) {
            m.choices[s].push_back({static_cast<ActionId>(dir), {{terminal, 1.0}}, 10.0});
            continue;
          }
          if (q.x < 0 || q.y < 0 || q.y >= n) q = p;
          m.choices[s].push_back({static_cast<ActionId>(dir), {{sid(q, mask), 1.0}}, 0.0});
        }
        if (rock_here >= 0) {
          const bool good = mask >> rock_here & 1u;
          const std::size_t after = mask & ~(std::size_t{1} << rock_here);
          m.choices[s].push_back({4, {{sid(p, after), 1.0}}, good ? 10.0 : -10.0});
        } else {
          m.choices[s].push_back({4, {{s, 1.0}}, 0.0});
        }
        for (int i = 0; i < b; ++i)
          m.choices[s].push_back({static_cast<ActionId>(5 + i), {{s, 1.0}}, 0.0});
      }
  absorbing(m, terminal);
  m.labels["exit"] = {terminal};
  const std::size_t init_mask = 0x5555555555555555ULL & (masks - 1);
  m.initial = sid({0, n / 2}, init_mask);
  return m;
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Navigation: return "navigation";
    case Family::Delivery: return "delivery";
    case Family::Slippery: return "slippery";
    case Family::Maze: return "maze";
    case Family::Grid: return "grid";
    case Family::RockSample: return "rocksample";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::Navigation, Family::Delivery, Family::Slippery, Family::Maze,
                   Family::Grid, Family::RockSample})
    if (family_name(f) == name) return f;
  throw std::invalid_argument("unknown benchmark family '" + std::string(name) + "'");
}

std::vector<Cell> default_static_obstacles(int size) {
  std::vector<Cell> out;
  for (int y = 0; y <= size - 2; y += 2) out.push_back({1, y});
  return out;
}

std::vector<Cell> rock_positions(int n, int b) {
  // Linear congruential walk seeded by (n, b); skips duplicates and the start cell.
  std::vector<Cell> out;
  std::uint64_t state = 0x9E3779B97F4A7C15ULL ^ (static_cast<std::uint64_t>(n) << 32) ^
                        static_cast<std::uint64_t>(b);
  while (static_cast<int>(out.size()) < b) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    const int cell = static_cast<int>((state >> 33) % static_cast<std::uint64_t>(n * n));
    const Cell p{cell % n, cell / n};
    if (p == Cell{0, n / 2}) continue;
    if (std::find(out.begin(), out.end(), p) != out.end()) continue;
    out.push_back(p);
  }
  return out;
}

void check_config(const GridConfig& cfg) {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument(std::string(family_name(cfg.family)) + ": " + why);
  };
  const int c = cfg.size;
  switch (cfg.family) {
    case Family::Maze:
      if (c < 1) fail("size must be >= 1");
      return;
    case Family::Grid:
      if (c < 2) fail("size must be >= 2");
      return;
    case Family::RockSample:
      if (c < 2) fail("size must be >= 2");
      if (cfg.rocks < 1 || cfg.rocks > 16 || cfg.rocks >= c * c) fail("rock count must be in 1..min(16, n*n-1)");
      return;
    case Family::Navigation:
    case Family::Delivery:
    case Family::Slippery:
      break;
  }
  if (c < (cfg.family == Family::Delivery ? 2 : 3)) fail("size too small");
  if (cfg.view_range != 1) fail("only viewing range 1 is supported");
  if (!(cfg.slip >= 0.0 && cfg.slip < 0.5)) fail("slip probability must lie in [0, 0.5)");
  auto inside = [&](Cell p) { return p.x >= 0 && p.y >= 0 && p.x < c && p.y < c; };
  const auto obstacles = cfg.static_obstacles.value_or(std::vector<Cell>{});
  for (Cell o : obstacles)
    if (!inside(o)) fail("static obstacle outside the grid");
  for (const auto& l : {cfg.landmark_a, cfg.landmark_b}) {
    if (!l) continue;
    if (!inside(*l)) fail("landmark outside the grid");
    if (std::find(obstacles.begin(), obstacles.end(), *l) != obstacles.end())
      fail("landmark on a static obstacle");
  }
  const Cell start{0, cfg.family == Family::Navigation ? 0 : c - 1};
  if (std::find(obstacles.begin(), obstacles.end(), start) != obstacles.end())
    fail("start cell is blocked");
  if (cfg.family == Family::Navigation &&
      std::find(obstacles.begin(), obstacles.end(), Cell{c - 1, 0}) != obstacles.end())
    fail("moving obstacle start cell is blocked");
}

Pomdp generate_benchmark(const GridConfig& in) {
  GridConfig cfg = in;
  const int c = cfg.size;
  if (!cfg.landmark_a) cfg.landmark_a = Cell{c - 1, c - 1};
  if (!cfg.landmark_b) cfg.landmark_b = Cell{0, 0};
  if (!cfg.static_obstacles) {
    if (cfg.family == Family::Navigation || cfg.family == Family::Slippery)
      cfg.static_obstacles = default_static_obstacles(c);
    else
      cfg.static_obstacles = std::vector<Cell>{};
  }
  check_config(cfg);
  switch (cfg.family) {
    case Family::Navigation: return navigation(cfg);
    case Family::Delivery: return landmark_grid(cfg, false);
    case Family::Slippery: return landmark_grid(cfg, true);
    case Family::Maze: return maze(cfg);
    case Family::Grid: return grid(cfg);
    case Family::RockSample: return rocksample(cfg);
  }
  throw std::invalid_argument("unknown family");
}

}  // namespace psynth
