#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "psynth/dataset.hpp"
#include "psynth/extract.hpp"
#include "psynth/policy.hpp"
#include "support.hpp"

using namespace psynth;
using testing::corridor;

namespace {

MdpStrategy per_state(const Pomdp& m, const std::vector<std::vector<double>>& rows) {
  MdpStrategy s;
  s.num_actions = m.num_actions();
  for (const auto& r : rows) s.table.insert(s.table.end(), r.begin(), r.end());
  return s;
}

std::vector<Sequence> random_sequences(std::mt19937_64& rng, std::size_t count, std::size_t len, std::size_t z,
                                       std::size_t a) {
  std::vector<Sequence> out(count);
  for (auto& s : out) {
    for (std::size_t i = 0; i <= len; ++i) s.obs.push_back(rng() % z);
    for (std::size_t i = 0; i < len; ++i) s.actions.push_back(rng() % a);
  }
  return out;
}

}  // namespace

TEST_CASE("trajectory sampling") {
  const Pomdp m = corridor();
  const auto sigma = per_state(m, {{0.3, 0.7}, {0.0, 1.0}, {1, 0}, {1, 0}});
  SampleOptions opt;
  opt.count = 10000;
  opt.max_len = 4;
  opt.seed = 42;
  opt.starts = {0};
  const auto paths = sample_trajectories(m, sigma, opt);
  REQUIRE(paths.size() == 10000);
  double left = 0;
  for (const auto& p : paths) {
    CHECK(p.states.size() == p.actions.size() + 1);
    CHECK(p.actions.size() <= 4);
    left += p.actions.front() == 0;
  }
  CHECK(std::abs(left / 10000 - 0.3) < 0.02);
  CHECK(sample_trajectories(m, sigma, opt) == paths);

  opt.count = 0;
  CHECK(sample_trajectories(m, sigma, opt).empty());
}

TEST_CASE("deterministic chain gives the unique prefix") {
  const Pomdp m = corridor();
  const auto sigma = per_state(m, {{0, 1}, {1, 0}, {1, 0}, {1, 0}});
  SampleOptions opt;
  opt.count = 5;
  opt.max_len = 3;
  opt.starts = {0};
  for (const auto& p : sample_trajectories(m, sigma, opt)) {
    CHECK(p.states == std::vector<StateId>{0, 1, 0, 1});
    CHECK(p.actions == std::vector<ActionId>{1, 0, 1});
  }
}

TEST_CASE("observation sequences substitute observations and keep aliases") {
  const Pomdp m = corridor();
  const std::vector<Path> paths{{{0, 1, 2}, {1, 1}}, {{1, 0, 1}, {0, 1}}, {{0, 1, 0}, {1, 0}}};
  const auto d = to_observation_sequences(paths, m);
  REQUIRE(d.sequences.size() == 3);
  CHECK(d.sequences[0].obs == std::vector<ObsId>{0, 0, 1});
  CHECK(d.sequences[0].actions == std::vector<ActionId>{1, 1});
  // Different paths, same observation trace: both rows kept.
  CHECK(d.sequences[1].obs == d.sequences[2].obs);
  CHECK(d.steps() == 6);
  CHECK(d.model_hash == model_hash(m));
  CHECK(parse_dataset(serialize_dataset(d)) == d);
}

TEST_CASE("fresh policy is near uniform, deterministic and normalised") {
  const RecurrentPolicy p(7, 4, 16, 3);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    std::vector<ObsId> seq(1 + rng() % 6);
    for (auto& z : seq) z = rng() % 7;
    const auto d = policy_forward(p, seq);
    double sum = 0;
    for (double x : d) {
      CHECK(x > 0.25 / 3);
      CHECK(x < 0.25 * 3);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
    CHECK(policy_forward(p, seq) == d);
  }
  const std::vector<ObsId> bad{9};
  CHECK_THROWS(policy_forward(p, bad));
}

TEST_CASE("softmax stays normalised after training") {
  std::mt19937_64 rng(2);
  TrajectoryDataset d;
  d.num_observations = 5;
  d.num_actions = 3;
  d.sequences = random_sequences(rng, 50, 6, 5, 3);
  RecurrentPolicy p(5, 3, 8, 1);
  TrainConfig cfg;
  cfg.hidden = 8;
  cfg.epochs = 5;
  cfg.learning_rate = 0.05;
  train(p, d, cfg);
  for (const auto& s : d.sequences)
    for (const auto& row : p.forward_all(s.obs)) {
      double sum = 0;
      for (double x : row) sum += x;
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("gradient check") {
  std::mt19937_64 rng(4);
  for (std::size_t k : {1u, 2u}) {
    const RecurrentPolicy p(6, 3, 4, 8, k);
    const auto batch = random_sequences(rng, 3, 5, 6, 3);
    CHECK(gradient_check(p, batch) < 1e-4);
  }
  const RecurrentPolicy p(3, 2, 4, 1);
  CHECK(gradient_check(p, std::vector<Sequence>{}) == 0.0);
  CHECK(central_difference([](double x) { return 3 * x * x + x; }, 2.0) == doctest::Approx(13.0).epsilon(1e-8));
}

TEST_CASE("memorisation and zero epochs") {
  TrajectoryDataset d;
  d.num_observations = 3;
  d.num_actions = 3;
  const Sequence s{{0, 1, 2, 1, 0, 2}, {2, 0, 1, 1, 2}};
  d.sequences.assign(16, s);
  RecurrentPolicy p(3, 3, 16, 5);
  const RecurrentPolicy before = p;
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto none = train(p, d, cfg);
  CHECK(none.epoch_loss.empty());
  CHECK(p == before);

  cfg.epochs = 300;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 16;
  const auto rep = train(p, d, cfg);
  CHECK(rep.final_loss < 0.05);
  CHECK(rep.final_loss <= rep.initial_loss);
  CHECK(!rep.flagged);
  const auto out = p.forward_all(s.obs);
  for (std::size_t i = 0; i < s.actions.size(); ++i)
    CHECK(std::max_element(out[i].begin(), out[i].end()) - out[i].begin() == static_cast<long>(s.actions[i]));

  CHECK(RecurrentPolicy::parse(p.serialize()) == p);
  d.num_actions = 4;
  CHECK_THROWS_AS(train(p, d, cfg), std::invalid_argument);
}

TEST_CASE("extraction restricts to class actions") {
  // Only 'go' exists in observation 1; the row must put all mass there.
  const Pomdp m = parse_model(R"(pomdp ex
states 2
actions go stay
init 0
observe 0 -> 0
observe 1 -> 1
trans 0 go : 1 -> 1
trans 0 stay : 1 -> 0
trans 1 go : 1 -> 1
)");
  const RecurrentPolicy p(2, 2, 4, 2);
  ExtractReport rep;
  const auto s = extract_strategy(p, m, 1, &rep, 3);
  check_distributions(s);
  CHECK(s(1, 0) == 1.0);
  CHECK(s(1, 1) == 0.0);
  const std::vector<ObsId> z0{0};
  const auto raw = policy_forward(p, z0);
  CHECK(s(0, 0) == doctest::Approx(raw[0]));
  CHECK(rep.fallbacks == 0);
}
