#include <doctest.h>

#include <algorithm>
#include <random>

#include "psynth/lp.hpp"

using namespace psynth;

TEST_CASE("simplex on small programs") {
  LinearProgram lp;
  lp.vars = 2;
  lp.c = {1, 1};
  lp.a_le = {{1, 2}, {3, 1}};
  lp.b_le = {4, 6};
  auto r = solve_lp(lp);
  REQUIRE(r.status == LpResult::Status::Optimal);
  CHECK(r.objective == doctest::Approx(2.8));
  CHECK(r.x[0] == doctest::Approx(1.6));
  CHECK(r.x[1] == doctest::Approx(1.2));

  LinearProgram eq = lp;
  eq.a_eq = {{1, -1}};
  eq.b_eq = {0};
  r = solve_lp(eq);
  REQUIRE(r.status == LpResult::Status::Optimal);
  CHECK(r.x[0] == doctest::Approx(r.x[1]));
  CHECK(r.objective == doctest::Approx(2.0 * 4.0 / 3.0));

  LinearProgram bad;
  bad.vars = 1;
  bad.c = {1};
  bad.a_le = {{1}};
  bad.b_le = {1};
  bad.a_ge = {{1}};
  bad.b_ge = {2};
  CHECK(solve_lp(bad).status == LpResult::Status::Infeasible);

  LinearProgram open;
  open.vars = 1;
  open.c = {1};
  CHECK(solve_lp(open).status == LpResult::Status::Unbounded);
}

TEST_CASE("max-min games") {
  auto r = max_min({{1, 0}, {0, 1}});
  CHECK(r.value == doctest::Approx(0.5));
  CHECK(r.weights[0] == doctest::Approx(0.5));
  CHECK(r.weights[1] == doctest::Approx(0.5));

  // Column 0 dominates.
  r = max_min({{1, 0.5}, {1, 0.2}});
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(r.weights[0] == doctest::Approx(1.0));

  // Tied worst case; the second stage prefers the larger total.
  r = max_min({{0, 0}, {0.2, 1.0}});
  CHECK(r.value == doctest::Approx(0.0));
  CHECK(r.weights[1] == doctest::Approx(1.0));
}

TEST_CASE("max-min beats every sampled distribution") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng() % 6, cols = 1 + rng() % 5;
    std::vector<std::vector<double>> q(rows, std::vector<double>(cols));
    for (auto& row : q)
      for (auto& x : row) x = u(rng);
    const auto r = max_min(q);
    double sum = 0;
    for (double w : r.weights) {
      CHECK(w >= -1e-12);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(min_payoff(q, r.weights) == doctest::Approx(r.value).epsilon(1e-9));
    for (int k = 0; k < 20; ++k) {
      std::vector<double> d(cols);
      double t = 0;
      for (auto& x : d) t += (x = u(rng));
      for (auto& x : d) x /= t;
      CHECK(min_payoff(q, d) <= r.value + 1e-9);
    }
  }
}
