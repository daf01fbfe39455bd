#include <doctest.h>

#include "psynth/benchmarks.hpp"
#include "psynth/mc.hpp"

using namespace psynth;

namespace {

Pomdp gen(Family f, int size, int rocks = 0) {
  GridConfig c;
  c.family = f;
  c.size = size;
  c.rocks = rocks;
  return generate_benchmark(c);
}

}  // namespace

TEST_CASE("maze and grid counts follow their closed forms") {
  for (int c = 1; c <= 10; ++c) {
    const Pomdp m = gen(Family::Maze, c);
    CHECK(m.num_states() == static_cast<std::size_t>(3 * c + 8));
    CHECK(m.num_actions() == 4);
    CHECK(m.num_observations == 7);
    CHECK(validate(m).empty());
  }
  for (int c = 2; c <= 10; ++c) {
    const Pomdp m = gen(Family::Grid, c);
    CHECK(m.num_states() == static_cast<std::size_t>(c * c));
    CHECK(m.num_observations == 2);
    CHECK(validate(m).empty());
  }
}

TEST_CASE("rocksample instances") {
  const Pomdp a = gen(Family::RockSample, 4, 4);
  CHECK(a.num_states() == 257);
  CHECK(a.num_actions() == 9);
  CHECK(a.num_observations == 2);
  const Pomdp b = gen(Family::RockSample, 5, 5);
  CHECK(b.num_states() == 801);
  CHECK(b.num_actions() == 10);
  CHECK(validate(b).empty());
}

TEST_CASE("navigation-style families") {
  for (Family f : {Family::Navigation, Family::Delivery, Family::Slippery}) {
    const Pomdp m = gen(f, 4);
    CHECK(m.num_observations == 256);
    CHECK(m.num_actions() == 4);
    CHECK(validate(m).empty());
  }
  // (f-1)^2 + 2 with f free cells; a 4x4 grid has obstacles at (1,0) and (1,2).
  CHECK(gen(Family::Navigation, 4).num_states() == 13 * 13 + 2);
}

TEST_CASE("generation is deterministic") {
  for (Family f : {Family::Navigation, Family::Slippery, Family::Maze}) CHECK(gen(f, 5) == gen(f, 5));
}

TEST_CASE("invalid configurations are rejected") {
  CHECK_THROWS_AS(gen(Family::Grid, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen(Family::RockSample, 4, 0), std::invalid_argument);
  CHECK_THROWS(parse_family("hexworld"));
  CHECK(parse_family("maze") == Family::Maze);
}

TEST_CASE("maze moves stay on the grid") {
  // Going north from the top row must bump, never wrap around.
  const Pomdp m = gen(Family::Maze, 1);
  const ActionId north = m.action_index("north");
  for (StateId s = 0; s < 5; ++s) {
    const Choice* c = m.find_choice(s, north);
    REQUIRE(c != nullptr);
    REQUIRE(c->successors.size() == 1);
    CHECK(c->successors[0].target == s);
  }
}
