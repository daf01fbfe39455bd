#pragma once
// Trajectory sampling and observation-action training data.
//
// Dataset file format:
//   dataset v1 observations=<Z> actions=<A> seed=<seed> max_len=<L> model=<hash>
//   z0 a0 z1 a1 ... zn          (one sequence per line, integer ids)

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "psynth/model.hpp"
#include "psynth/strategy.hpp"

namespace psynth {

struct Path {
  std::vector<StateId> states;    // n + 1 states
  std::vector<ActionId> actions;  // n actions
  bool operator==(const Path&) const = default;
};

struct Sequence {
  std::vector<ObsId> obs;         // z0 .. zn
  std::vector<ActionId> actions;  // a0 .. a(n-1)
  bool operator==(const Sequence&) const = default;
};

struct TrajectoryDataset {
  std::size_t num_observations = 0;
  std::size_t num_actions = 0;
  std::vector<Sequence> sequences;
  std::string model_hash;
  std::uint64_t seed = 0;
  std::size_t max_len = 0;

  std::size_t steps() const;  // labelled positions
  void append(const TrajectoryDataset& other);
  bool operator==(const TrajectoryDataset&) const = default;
};

struct SampleOptions {
  std::size_t count = 5000;
  std::size_t max_len = 20;
  std::uint64_t seed = 1;
  std::vector<StateId> starts;  // empty: uniform over all states
  std::vector<char> stop;       // paths end on entering these states; empty: none
};

// Paths of the chain induced by a per-state strategy. Paths also end in
// absorbing states.
std::vector<Path> sample_trajectories(const Mdp& m, const MdpStrategy& sigma, const SampleOptions& opt);

TrajectoryDataset to_observation_sequences(const std::vector<Path>& paths, const Pomdp& m);

std::string serialize_dataset(const TrajectoryDataset& d);
TrajectoryDataset parse_dataset(std::string_view text);

}  // namespace psynth
