#pragma once
// Generators for the gridworld benchmark families.
//
// Coordinates are (x, y) with x growing east and y growing north; grid actions
// are always {north, east, south, west} in that order.
//
// Navigation(c): agent plus one moving obstacle on a c x c grid. States are
//   (agent, obstacle) pairs over free cells with agent != obstacle and the
//   agent not on the goal, plus an absorbing goal state (label A) and an
//   absorbing crash state (label X). The count is (f-1)*(f-1) + 2 where f is
//   the number of free cells. Observation: 8 bits, one per neighbouring cell in
//   the order N, NE, E, SE, S, SW, W, NW; a bit is set when that cell is off
//   the grid, a static obstacle or the moving obstacle. The obstacle moves
//   uniformly in one of the four directions and stays put when blocked.
// Delivery(c) / Slippery(c): agent only; observation bits 0-3 flag blocked
//   N/E/S/W, bit 4 = on A, bit 5 = on B, bit 6 = A adjacent, bit 7 = B
//   adjacent. Slippery moves perpendicular with probability `slip` each way
//   and crashes (label X, observation 255) on static obstacles.
// Maze(c): c+2 rows; 5 top cells, then c rows of three corridor cells and a
//   bottom row whose middle cell is the goal. 3c+8 states, 7 observations.
// Grid(c): c x c, goal in the north-east corner, observation 1 only on goal.
// RockSample[n,b]: n*n*2^b + 1 states, actions 4 moves + sample + b checks,
//   observation 1 iff standing on a good rock.
//
// Static obstacles default to cells (1, y) for even y <= c-2.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psynth/model.hpp"

namespace psynth {

enum class Family { Navigation, Delivery, Slippery, Maze, Grid, RockSample };

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

struct GridConfig {
  Family family = Family::Grid;
  int size = 3;
  std::optional<std::vector<Cell>> static_obstacles;  // nullopt -> default rule
  std::optional<Cell> landmark_a;                     // default (c-1, c-1)
  std::optional<Cell> landmark_b;                     // default (0, 0)
  double slip = 0.1;
  int rocks = 0;
  int view_range = 1;
};

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

// Throws std::invalid_argument when cfg is not valid for its family.
void check_config(const GridConfig& cfg);
Pomdp generate_benchmark(const GridConfig& cfg);

std::vector<Cell> default_static_obstacles(int size);
// Rock positions used by RockSample[n,b].
std::vector<Cell> rock_positions(int n, int b);

}  // namespace psynth
