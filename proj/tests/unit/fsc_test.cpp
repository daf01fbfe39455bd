#include <doctest.h>

#include <random>

#include "psynth/fsc.hpp"
#include "support.hpp"

using namespace psynth;
using testing::corridor;

namespace {

ObservationStrategy random_strategy(const Pomdp& m, std::mt19937_64& rng, std::size_t k = 1) {
  std::uniform_real_distribution<double> u(0, 1);
  ObservationStrategy s(m.num_observations, m.num_actions(), k);
  for (ObsId z = 0; z < m.num_observations; ++z) {
    const auto acts = m.class_actions(z);
    double t = 0;
    for (ActionId a : acts) t += (s.row(z)[a] = u(rng));
    for (ActionId a : acts) s.row(z)[a] /= t;
  }
  return s;
}

}  // namespace

TEST_CASE("observation-repeat memory on the corridor") {
  const Pomdp m = corridor();
  const auto delta = memory_update(MemoryKind::ObservationRepeat, 2, m);
  check_memory_update(delta);
  // No corridor action surely keeps the corridor observation.
  for (std::size_t n = 0; n < 2; ++n)
    for (ActionId a = 0; a < 2; ++a) CHECK(delta(n, 0, a) == n);
  // Absorbing states repeat their observation; the counter saturates.
  CHECK(delta(0, 1, 0) == 1);
  CHECK(delta(1, 1, 0) == 1);
}

TEST_CASE("product multiplies states and observations by k") {
  const Pomdp m = corridor();
  for (std::size_t k : {1u, 2u, 4u}) {
    const auto delta = memory_update(MemoryKind::ObservationRepeat, k, m);
    const Pomdp p = product(m, delta);
    CHECK(p.num_states() == k * m.num_states());
    CHECK(p.num_observations == k * m.num_observations);
    CHECK(validate(p).empty());
    for (StateId s = 0; s < p.num_states(); ++s) CHECK(p.observation[s] == m.observation[s / k] * k + s % k);
    CHECK(p.initial_states().front().target == m.initial * k);
  }
}

TEST_CASE("projected controllers keep the product value") {
  const Pomdp m = corridor();
  std::mt19937_64 rng(9);
  for (const char* text : {"Pmax [ true U goal ]", "Emin [ F goal ]"}) {
    const auto spec = parse_spec(text);
    for (std::size_t k : {1u, 2u, 4u}) {
      const auto delta = memory_update(MemoryKind::ObservationRepeat, k, m);
      const Pomdp p = product(m, delta);
      for (int i = 0; i < 20; ++i) {
        const auto sigma = random_strategy(p, rng, k);
        const Fsc f = project_fsc(sigma, delta);
        CHECK(flatten(f) == sigma);
        const double a = check(p, sigma, spec).value, b = check_fsc(m, f, spec).value;
        if (std::isinf(a)) CHECK(std::isinf(b));
        else CHECK(std::abs(a - b) <= 1e-12);
      }
    }
  }
}

TEST_CASE("spec-driven classes from label lists") {
  const Pomdp m = corridor();
  const auto c = spec_driven_classes(m, "goal", "bad");
  CHECK(c.set == std::vector<ObsId>{1});
  const auto both = spec_driven_classes(m, "goal,bad", "bad");
  CHECK(both.set == std::vector<ObsId>{1});
  CHECK_THROWS_AS(spec_driven_classes(m, "nowhere", "bad"), ModelError);
  const auto delta = memory_update(MemoryKind::SpecDriven, 2, m, &c);
  check_memory_update(delta);
  CHECK_THROWS(memory_update(MemoryKind::SpecDriven, 2, m));
  CHECK(parse_memory_kind(memory_kind_name(MemoryKind::SpecDriven)) == MemoryKind::SpecDriven);
}

TEST_CASE("strategy and controller files round-trip") {
  const Pomdp m = corridor();
  std::mt19937_64 rng(1);
  const auto s = random_strategy(m, rng);
  const auto back = parse_strategy(serialize_strategy(s, m.actions), m.actions);
  CHECK(back.num_observations == s.num_observations);
  for (std::size_t i = 0; i < s.table.size(); ++i) CHECK(back.table[i] == s.table[i]);

  const auto delta = memory_update(MemoryKind::ObservationRepeat, 2, m);
  const Fsc f = project_fsc(random_strategy(product(m, delta), rng, 2), delta);
  const Fsc g = parse_fsc(serialize_fsc(f, m.actions), m.actions, m.num_observations);
  CHECK(g.k == 2);
  CHECK(g.delta.table == f.delta.table);
  CHECK(g.delta.nodes == 2);
  CHECK(g.gamma == f.gamma);

  CHECK_THROWS_AS(parse_strategy("strategy v1 observations=2 actions=2 memory=1\n0 : jump=1\n", m.actions),
                  ModelError);
  CHECK_THROWS_AS(check_distributions(ObservationStrategy(2, 2)), ModelError);
}
