#pragma once
// Shared helpers and independent oracles for the test binaries.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "psynth/mc.hpp"
#include "psynth/model_io.hpp"

namespace psynth::testing {

inline Pomdp corridor() { return load_model(std::string(PSYNTH_FIXTURES) + "/tiny_corridor.pomdp"); }

// Random chain with 1..3 successors per state; about a tenth of the states
// are absorbing so that bottom components of several sizes appear.
inline Dtmc random_dtmc(std::mt19937_64& rng, std::size_t n) {
  Dtmc d;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1), fan(1, 3);
  std::uniform_real_distribution<double> w(0.05, 1.0), coin(0.0, 1.0);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::pair<std::size_t, double>> row;
    if (coin(rng) < 0.1) {
      row.push_back({s, 1.0});
    } else {
      const std::size_t k = fan(rng);
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        // Mostly local edges keep components small and plentiful.
        const std::size_t t = coin(rng) < 0.7 ? (s + 1 + pick(rng) % 5) % n : pick(rng);
        const double x = w(rng);
        auto it = std::find_if(row.begin(), row.end(), [&](auto& e) { return e.first == t; });
        if (it != row.end()) it->second += x;
        else row.push_back({t, x});
        total += x;
      }
      for (auto& e : row) e.second /= total;
    }
    std::sort(row.begin(), row.end());
    for (auto& [t, p] : row) {
      d.p.col.push_back(t);
      d.p.val.push_back(p);
    }
    d.p.row_start.push_back(d.p.col.size());
  }
  d.reward.assign(n, 0.0);
  d.initial = 0;
  d.initial_distribution = {{0, 1.0}};
  d.origin.resize(n);
  for (std::size_t s = 0; s < n; ++s) d.origin[s] = s;
  d.memory.assign(n, 0);
  return d;
}

inline std::vector<char> random_mask(std::mt19937_64& rng, std::size_t n, double density) {
  std::bernoulli_distribution b(density);
  std::vector<char> m(n);
  for (auto& x : m) x = b(rng);
  return m;
}

// p_{t+1} = P p_t with goal pinned to 1 and avoid to 0.
inline std::vector<double> power_reach(const Dtmc& d, const std::vector<char>& goal,
                                       const std::vector<char>& avoid, std::size_t steps = 10000) {
  const std::size_t n = d.num_states();
  std::vector<double> p(n), q(n);
  for (std::size_t s = 0; s < n; ++s) p[s] = goal[s] ? 1.0 : 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      if (goal[s]) { q[s] = 1.0; continue; }
      if (avoid[s]) { q[s] = 0.0; continue; }
      double acc = 0.0;
      for (std::size_t i = d.p.row_start[s]; i < d.p.row_start[s + 1]; ++i) acc += d.p.val[i] * p[d.p.col[i]];
      q[s] = acc;
    }
    std::swap(p, q);
  }
  return p;
}

// reach[s][t]: t reachable from s (reflexive), by one search per state.
inline std::vector<std::vector<char>> reachability(const Dtmc& d) {
  const std::size_t n = d.num_states();
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> stack{s};
    r[s][s] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t i = d.p.row_start[v]; i < d.p.row_start[v + 1]; ++i) {
        const std::size_t t = d.p.col[i];
        if (d.p.val[i] > 0 && !r[s][t]) {
          r[s][t] = 1;
          stack.push_back(t);
        }
      }
    }
  }
  return r;
}

// Accepting bottom components from the reachability closure alone: s is in a
// bottom component iff everything it reaches reaches it back.
inline std::vector<char> naive_accepting(const Dtmc& d, const std::vector<char>& rec1,
                                         const std::vector<char>& rec2, const std::vector<char>& safe) {
  const std::size_t n = d.num_states();
  const auto r = reachability(d);
  std::vector<char> acc(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    bool bottom = true, h1 = false, h2 = false, ok = true;
    for (std::size_t t = 0; t < n && bottom; ++t) {
      if (!r[s][t]) continue;
      if (!r[t][s]) bottom = false;
      h1 |= rec1[t] != 0;
      h2 |= rec2[t] != 0;
      ok &= safe[t] != 0;
    }
    acc[s] = bottom && h1 && h2 && ok;
  }
  return acc;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isinf(a[i]) || std::isinf(b[i])) {
      if (a[i] != b[i]) return INFINITY;
      continue;
    }
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace psynth::testing
