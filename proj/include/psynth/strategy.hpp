#pragma once
// Observation-based and per-state strategies.
//
// Strategy file format:
//   strategy v1 observations=<Z> actions=<A> memory=<k>
//   <z> [<n>] : <action>=<p> <action>=<p> ...
// With memory k > 1 each line names an (observation, node) pair, which is the
// product observation z * k + n. Omitted actions have probability zero.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psynth/model.hpp"

namespace psynth {

struct ObservationStrategy {
  std::size_t num_observations = 0;  // flat ids; z * memory_nodes + n when memory_nodes > 1
  std::size_t num_actions = 0;
  std::size_t memory_nodes = 1;
  std::vector<double> table;  // num_observations x num_actions

  ObservationStrategy() = default;
  ObservationStrategy(std::size_t observations, std::size_t actions, std::size_t memory = 1)
      : num_observations(observations), num_actions(actions), memory_nodes(memory),
        table(observations * actions, 0.0) {}

  std::span<const double> row(ObsId z) const { return {table.data() + z * num_actions, num_actions}; }
  std::span<double> row(ObsId z) { return {table.data() + z * num_actions, num_actions}; }
  double operator()(ObsId z, ActionId a) const { return table[z * num_actions + a]; }

  bool operator==(const ObservationStrategy&) const = default;
};

// Uniform over the actions available to each observation class.
ObservationStrategy uniform_strategy(const Pomdp& m);
ObservationStrategy deterministic_strategy(const Pomdp& m, const std::vector<ActionId>& choice);

// Throws ModelError if a row is not a distribution within tol.
void check_distributions(const ObservationStrategy& s, double tol = kStochasticTolerance);

// Per-state randomized strategy for the underlying MDP.
struct MdpStrategy {
  std::size_t num_actions = 0;
  std::vector<double> table;  // states x actions

  std::span<const double> row(StateId s) const { return {table.data() + s * num_actions, num_actions}; }
  std::span<double> row(StateId s) { return {table.data() + s * num_actions, num_actions}; }
};

MdpStrategy lift(const Pomdp& m, const ObservationStrategy& s);
// Fails with ModelError unless all states sharing an observation agree.
ObservationStrategy to_observation_strategy(const Pomdp& m, const MdpStrategy& s);

std::string serialize_strategy(const ObservationStrategy& s, const std::vector<std::string>& actions);
ObservationStrategy parse_strategy(std::string_view text, const std::vector<std::string>& actions);

}  // namespace psynth
