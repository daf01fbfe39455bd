#include <doctest.h>

#include <random>

#include "psynth/benchmarks.hpp"
#include "psynth/graph.hpp"
#include "psynth/linsolve.hpp"
#include "psynth/mc.hpp"
#include "support.hpp"

using namespace psynth;
using testing::corridor;

namespace {

// Chain from explicit rows.
Dtmc chain(const std::vector<std::vector<std::pair<std::size_t, double>>>& rows,
           std::vector<double> reward = {}) {
  Dtmc d;
  for (const auto& r : rows) {
    for (auto [t, p] : r) {
      d.p.col.push_back(t);
      d.p.val.push_back(p);
    }
    d.p.row_start.push_back(d.p.col.size());
  }
  d.reward = reward.empty() ? std::vector<double>(rows.size(), 0.0) : reward;
  d.initial_distribution = {{0, 1.0}};
  d.origin.resize(rows.size());
  for (std::size_t s = 0; s < rows.size(); ++s) d.origin[s] = s;
  d.memory.assign(rows.size(), 0);
  return d;
}

std::vector<char> only(std::size_t n, std::initializer_list<std::size_t> set) {
  std::vector<char> m(n, 0);
  for (auto s : set) m[s] = 1;
  return m;
}

}  // namespace

TEST_CASE("reach_prob on hand chains") {
  // s0 -> 0.5 s1, 0.5 bad; s1 -> goal.
  const Dtmc d = chain({{{1, 0.5}, {2, 0.5}}, {{3, 1.0}}, {{2, 1.0}}, {{3, 1.0}}});
  const auto p = reach_prob(d, only(4, {3}), only(4, {2}));
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[3] == 1.0);
  CHECK(p[2] == 0.0);
}

TEST_CASE("expected total reward") {
  const Dtmc a = chain({{{1, 1.0}}, {{1, 1.0}}}, {1.0, 0.0});
  CHECK(expected_total_reward(a, only(2, {1}))[0] == doctest::Approx(1.0));
  const Dtmc b = chain({{{0, 0.5}, {1, 0.5}}, {{1, 1.0}}}, {1.0, 0.0});
  CHECK(expected_total_reward(b, only(2, {1}))[0] == doctest::Approx(2.0).epsilon(1e-10));
  const Dtmc c = chain({{{1, 0.9}, {2, 0.1}}, {{1, 1.0}}, {{2, 1.0}}}, {1.0, 0.0, 1.0});
  CHECK(expected_total_reward(c, only(3, {1}))[0] == kInfinity);
}

TEST_CASE("buchi value on hand chains") {
  const std::vector<char> all(2, 1);
  // Absorbing A&B state.
  const Dtmc a = chain({{{1, 1.0}}, {{1, 1.0}}});
  CHECK(buchi_value(a, only(2, {1}), only(2, {1}), all)[0] == doctest::Approx(1.0));
  // 2-cycle alternating A and B.
  const Dtmc b = chain({{{1, 1.0}}, {{0, 1.0}}});
  CHECK(buchi_value(b, only(2, {0}), only(2, {1}), all)[0] == doctest::Approx(1.0));
  // Same cycle with an X state inside.
  CHECK(buchi_value(b, only(2, {0}), only(2, {1}), only(2, {0}))[0] == 0.0);
}

TEST_CASE("check on the corridor") {
  const Pomdp m = corridor();
  const auto spec = parse_spec("Pmax [ true U goal ]");
  const ActionId left = m.action_index("left"), right = m.action_index("right");
  CHECK(check(m, deterministic_strategy(m, {right, right}), spec).value == 1.0);
  CHECK(check(m, deterministic_strategy(m, {left, left}), spec).value == 0.0);
  // Uniform: p0 = p1 / 2, p1 = p0 / 2 + 1/2.
  CHECK(check(m, uniform_strategy(m), spec).value == doctest::Approx(1.0 / 3).epsilon(1e-9));

  // Induced rows are the hand mixture.
  const Dtmc d = induced_dtmc(m, uniform_strategy(m));
  CHECK(d.p.row_start[1] - d.p.row_start[0] == 2);
  CHECK(d.p.col[0] == 1);
  CHECK(d.p.val[0] == doctest::Approx(0.5));
  CHECK(d.p.col[1] == 3);

  // Non-strict threshold at the exact value holds, strict does not.
  const auto right_only = deterministic_strategy(m, {right, right});
  CHECK(check(m, right_only, parse_spec("P<=1 [ F goal ]")).satisfied);
  CHECK(!check(m, right_only, parse_spec("P<1 [ F goal ]")).satisfied);
  CHECK(check(m, right_only, parse_spec("P<=0 [ F bad ]")).satisfied);
}

TEST_CASE("mass on a disabled action is rejected") {
  Pomdp m = corridor();
  m.choices[1].pop_back();  // s1 loses 'right'
  ObservationStrategy s = uniform_strategy(corridor());
  CHECK_THROWS_AS(induced_dtmc(m, s), ModelError);
}

TEST_CASE("per-state MDP strategies do not pass as observation strategies") {
  GridConfig c;
  c.family = Family::Navigation;
  c.size = 3;
  const Pomdp m = generate_benchmark(c);
  const auto spec = parse_spec("Pmax [ !X U A ]");
  const auto sol = mdp_optimal(m, spec);
  CHECK_THROWS_AS(to_observation_strategy(m, sol.strategy), ModelError);
  // mdp-eval mode reproduces the optimum.
  const auto cm = compose(m, build_automaton(spec));
  CHECK(check(cm, sol.strategy, spec).value == doctest::Approx(sol.value).epsilon(1e-9));
}

TEST_CASE("mdp_optimal picks the better action, lowest index on ties") {
  Pomdp m = parse_model(R"(pomdp pick
states 3
actions a b c
init 0
observe 0 -> 0
observe 1 -> 1
observe 2 -> 1
trans 0 a : 0.5 -> 1, 0.5 -> 2
trans 0 b : 0.9 -> 1, 0.1 -> 2
trans 0 c : 0.9 -> 1, 0.1 -> 2
trans 1 a : 1 -> 1
trans 2 a : 1 -> 2
label goal : 1
)");
  const auto sol = mdp_optimal(m, parse_spec("Pmax [ F goal ]"));
  CHECK(sol.value == doctest::Approx(0.9));
  CHECK(sol.strategy.row(0)[1] == 1.0);
}

TEST_CASE("random chains: reach_prob matches power iteration, monotone in goal") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng() % 120;
    const Dtmc d = testing::random_dtmc(rng, n);
    auto goal = testing::random_mask(rng, n, 0.08);
    auto avoid = testing::random_mask(rng, n, 0.08);
    for (std::size_t s = 0; s < n; ++s)
      if (goal[s]) avoid[s] = 0;
    const auto p = reach_prob(d, goal, avoid);
    CHECK(testing::max_abs_diff(p, testing::power_reach(d, goal, avoid)) < 1e-6);
    for (double v : p) CHECK((v >= -1e-9 && v <= 1 + 1e-9));

    auto bigger = goal;
    bigger[rng() % n] = 1;
    for (std::size_t s = 0; s < n; ++s)
      if (bigger[s]) avoid[s] = 0;
    const auto p0 = reach_prob(d, goal, avoid), p1 = reach_prob(d, bigger, avoid);
    for (std::size_t s = 0; s < n; ++s) CHECK(p1[s] >= p0[s] - 1e-9);

    // The direct solver agrees with Gauss-Seidel.
    SolveOptions direct;
    direct.direct = true;
    CHECK(testing::max_abs_diff(p0, reach_prob(d, goal, avoid, direct)) < 1e-9);
  }
}

TEST_CASE("Tarjan components agree with the reachability closure") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 150;
    const Dtmc d = testing::random_dtmc(rng, n);
    std::size_t count = 0;
    const auto comp = scc_tarjan(d.graph(), &count);
    const auto r = testing::reachability(d);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t t = 0; t < n; ++t) CHECK((comp[s] == comp[t]) == (r[s][t] && r[t][s]));
    const auto rec1 = testing::random_mask(rng, n, 0.3), rec2 = testing::random_mask(rng, n, 0.3);
    const auto safe = testing::random_mask(rng, n, 0.9);
    CHECK(accepting_bsccs(d, rec1, rec2, safe) == testing::naive_accepting(d, rec1, rec2, safe));
  }
}

TEST_CASE("linear solver respects known entries") {
  // x0 = 0.5 x1 + 1, x1 known = 4.
  CsrMatrix p;
  p.col = {1};
  p.val = {0.5};
  p.row_start = {0, 1, 1};
  std::vector<double> x{0.0, 4.0};
  const auto st = solve_fixed_point(p, {1, 0}, {1.0, 0.0}, x);
  CHECK(x[0] == doctest::Approx(3.0));
  CHECK(x[1] == 4.0);
  CHECK(st.residual < 1e-10);
}
