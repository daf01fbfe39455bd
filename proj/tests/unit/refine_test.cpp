#include <doctest.h>

#include <algorithm>
#include <random>

#include "psynth/benchmarks.hpp"
#include "psynth/lp.hpp"
#include "psynth/refine.hpp"
#include "support.hpp"

using namespace psynth;
using testing::corridor;

namespace {

Pomdp nav(int size) {
  GridConfig c;
  c.family = Family::Navigation;
  c.size = size;
  return generate_benchmark(c);
}

ObservationStrategy random_strategy(const Pomdp& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  ObservationStrategy s(m.num_observations, m.num_actions());
  for (ObsId z = 0; z < m.num_observations; ++z) {
    const auto acts = m.class_actions(z);
    double t = 0;
    for (ActionId a : acts) t += (s.row(z)[a] = u(rng) < 0.3 ? 0.0 : u(rng));
    if (t == 0) t += (s.row(z)[acts.front()] = 1.0);
    for (ActionId a : acts) s.row(z)[a] /= t;
  }
  return s;
}

SynthesisConfig small_config() {
  SynthesisConfig cfg;
  cfg.sample_count = 300;
  cfg.resample_count = 100;
  cfg.max_len = 6;
  cfg.train.hidden = 8;
  cfg.train.learning_rate = 0.02;
  cfg.train.epochs = 10;
  return cfg;
}

}  // namespace

TEST_CASE("critical states are those above the threshold") {
  CHECK(critical_states({0.1, 0.5, 0.9}, 0.5) == std::vector<StateId>{2});
  CHECK(critical_states({0.1, 0.5, 0.9}, {0.0, 0.6, 1.0}) == std::vector<StateId>{0});
  // lambda' = lambda and every state meets the bound: nothing is critical.
  CHECK(critical_states({0.2, 0.3}, 0.3).empty());
}

TEST_CASE("critical decisions on the corridor") {
  const Pomdp m = corridor();
  const auto cx = critical_decisions(m, uniform_strategy(m), {3});
  // (z_corridor, left) via s0 -> bad, plus both self-loops of bad itself.
  REQUIRE(cx.decisions.size() == 3);
  CHECK(cx.decisions[0] == CriticalDecision{0, m.action_index("left"), 0, 3});
  CHECK(cx.decisions[1] == CriticalDecision{1, 0, 3, 3});
  // Zero-probability choices are not decisions.
  const auto right = deterministic_strategy(m, {1, 1});
  const auto only_loop = critical_decisions(m, right, {3}).decisions;
  REQUIRE(only_loop.size() == 1);
  CHECK(only_loop[0].z == 1);
}

TEST_CASE("critical decisions are sound and complete by brute force") {
  const Pomdp m = nav(3);
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const auto sigma = random_strategy(m, rng);
    std::vector<StateId> crit;
    for (StateId s = 0; s < m.num_states(); ++s)
      if (rng() % 4 == 0) crit.push_back(s);
    const auto cx = critical_decisions(m, sigma, crit);
    std::vector<char> is_crit(m.num_states());
    for (auto s : crit) is_crit[s] = 1;
    for (const auto& d : cx.decisions) {
      CHECK(m.observation[d.s] == d.z);
      CHECK(sigma(d.z, d.a) > 0);
      const Choice* c = m.find_choice(d.s, d.a);
      REQUIRE(c != nullptr);
      CHECK(std::any_of(c->successors.begin(), c->successors.end(),
                        [&](const Transition& t) { return t.target == d.next && t.prob > 0; }));
      CHECK(is_crit[d.next]);
    }
    std::size_t expected = 0;
    for (ObsId z = 0; z < m.num_observations; ++z)
      for (ActionId a = 0; a < m.num_actions(); ++a) {
        if (sigma(z, a) <= 0) continue;
        bool any = false;
        for (StateId s = 0; s < m.num_states() && !any; ++s)
          if (m.observation[s] == z)
            if (const Choice* c = m.find_choice(s, a))
              for (const auto& t : c->successors) any |= t.prob > 0 && is_crit[t.target];
        expected += any;
      }
    CHECK(cx.decisions.size() == expected);
  }
}

TEST_CASE("LP improvement never lowers the worst backup") {
  const Pomdp m = nav(3);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto sigma = random_strategy(m, rng);
    std::vector<double> v(m.num_states());
    for (auto& x : v) x = u(rng);
    const ObsId z = m.observation[rng() % m.num_states()];
    const auto imp = improve_lp(m, sigma, v, z);
    CHECK(imp.new_min >= imp.old_min - 1e-9);
    double sum = 0;
    for (double p : imp.distribution) sum += p;
    CHECK(sum == doctest::Approx(1.0));
    const auto b = class_backups(m, v, z);
    std::vector<double> w;
    for (ActionId a : b.actions) w.push_back(imp.distribution[a]);
    CHECK(min_payoff(b.q, w) == doctest::Approx(imp.new_min).epsilon(1e-9));
  }
}

TEST_CASE("resampled action frequencies follow the improved rows") {
  const Pomdp m = nav(3);
  const auto spec = parse_spec("Pmax [ !X U A ]");
  const auto sigma = uniform_strategy(m);
  const auto vals = check(m, sigma, spec).values;
  // Pick the busiest class and improve it.
  std::vector<std::size_t> sizes(m.num_observations);
  for (StateId s = 0; s < m.num_states(); ++s) ++sizes[m.observation[s]];
  const ObsId z = std::max_element(sizes.begin(), sizes.end()) - sizes.begin();
  auto improved = sigma;
  const auto imp = improve_lp(m, sigma, vals, z);
  // A visibly mixed row makes the frequency test meaningful.
  std::vector<double> mixed(m.num_actions(), 0.0);
  for (ActionId a : m.class_actions(z)) mixed[a] = 0.5 * imp.distribution[a] + 0.5 / m.class_actions(z).size();
  std::copy(mixed.begin(), mixed.end(), improved.row(z).begin());

  std::vector<StateId> starts;
  for (StateId s = 0; s < m.num_states(); ++s)
    if (m.observation[s] == z) starts.push_back(s);
  SampleOptions opt;
  opt.count = 10000;
  opt.max_len = 1;
  opt.seed = 17;
  const auto d = resample_from_critical(m, improved, starts, opt);
  std::vector<double> freq(m.num_actions(), 0.0);
  double total = 0;
  for (const auto& s : d.sequences)
    for (std::size_t i = 0; i < s.actions.size(); ++i)
      if (s.obs[i] == z) {
        freq[s.actions[i]] += 1;
        total += 1;
      }
  REQUIRE(total > 5000);
  for (ActionId a = 0; a < m.num_actions(); ++a) CHECK(std::abs(freq[a] / total - mixed[a]) < 0.02);
}

TEST_CASE("synthesis on the corridor") {
  const Pomdp m = corridor();
  const auto spec = parse_spec("Pmax [ true U goal ]");

  SUBCASE("early stop on a satisfiable instance") {
    // A softmax row never puts exactly zero on 'left', so the threshold form
    // is what can be met in the first iteration.
    auto cfg = small_config();
    cfg.early_stop = true;
    const auto r = synthesize(m, parse_spec("P>=0.99 [ true U goal ]"), cfg);
    CHECK(r.log.size() == 1);
    CHECK(r.satisfied);
    CHECK(r.best_value >= 0.99);
  }
  SUBCASE("fixed iteration count, logs re-verify, best is the max") {
    auto cfg = small_config();
    cfg.max_iterations = 10;
    const auto r = synthesize(m, spec, cfg);
    REQUIRE(r.log.size() == 10);
    REQUIRE(r.strategies.size() == 10);
    double best = -1;
    for (std::size_t i = 0; i < r.log.size(); ++i) {
      CHECK(r.log[i].iteration == i + 1);
      CHECK(std::abs(check(m, r.strategies[i], spec).value - r.log[i].value) <= 1e-12);
      best = std::max(best, r.log[i].value);
    }
    CHECK(r.best_value == best);
    CHECK(r.log[r.best_iteration - 1].value == best);
    CHECK(r.mdp_value == doctest::Approx(1.0));
  }
  SUBCASE("seeded runs are reproducible") {
    auto cfg = small_config();
    cfg.max_iterations = 2;
    const auto a = synthesize(m, spec, cfg), b = synthesize(m, spec, cfg);
    CHECK(a.best == b.best);
    CHECK(a.log[1].value == b.log[1].value);
  }
}

TEST_CASE("orientation keeps larger-is-better") {
  const auto pmin = parse_spec("Pmin [ F goal ]"), emin = parse_spec("Emin [ F goal ]");
  const auto u = orient({0.2, 0.8}, pmin, 1.0);
  CHECK(u[0] > u[1]);
  const auto c = orient({2.0, 4.0, kInfinity}, emin, cost_scale({2.0, 4.0, kInfinity}));
  CHECK(c[0] > c[1]);
  CHECK(c[1] > c[2]);
  CHECK(c[1] >= -1.0);
}
