#pragma once
// Exact verification of strategies via their induced Markov chains.

#include <cstddef>
#include <limits>
#include <vector>

#include "psynth/graph.hpp"
#include "psynth/linsolve.hpp"
#include "psynth/model.hpp"
#include "psynth/spec.hpp"
#include "psynth/strategy.hpp"

namespace psynth {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Dtmc {
  CsrMatrix p;                 // rows sorted by target
  std::vector<double> reward;  // expected one-step reward
  StateId initial = 0;
  std::vector<Transition> initial_distribution;  // never empty once built
  std::vector<StateId> origin;      // chain state -> model state
  std::vector<std::size_t> memory;  // chain state -> controller node (0 if memoryless)

  std::size_t num_states() const { return p.rows(); }
  std::size_t num_transitions() const { return p.col.size(); }
  Digraph graph() const;
  // Expectation of v under the initial distribution.
  double initial_value(const std::vector<double>& v) const;
};

double initial_value(const Mdp& m, const std::vector<double>& v);

// Rows are sum_a sigma(O(s))(a) * P(s,a,.). Mass on a disabled action throws
// ModelError naming (s, a).
Dtmc induced_dtmc(const Pomdp& m, const ObservationStrategy& sigma);
Dtmc induced_dtmc(const Mdp& m, const MdpStrategy& sigma);

// Probability of reaching goal while avoiding avoid.
std::vector<double> reach_prob(const Dtmc& d, const std::vector<char>& goal,
                               const std::vector<char>& avoid, const SolveOptions& opt = {});
// Expected total reward until goal; kInfinity where goal is missed with
// positive probability.
std::vector<double> expected_total_reward(const Dtmc& d, const std::vector<char>& goal,
                                          const SolveOptions& opt = {});
// Probability of visiting rec1 and rec2 infinitely often while staying in safe.
std::vector<double> buchi_value(const Dtmc& d, const std::vector<char>& rec1,
                                const std::vector<char>& rec2, const std::vector<char>& safe,
                                const SolveOptions& opt = {});
// Accepting bottom SCC membership used by buchi_value.
std::vector<char> accepting_bsccs(const Dtmc& d, const std::vector<char>& rec1,
                                  const std::vector<char>& rec2, const std::vector<char>& safe);

struct VerificationResult {
  bool satisfied = false;
  double value = 0.0;          // expectation over the initial distribution
  std::vector<double> values;  // per chain state
  std::size_t states = 0, transitions = 0;
  double seconds = 0.0;
};

// Values of a chain whose states are the composed model's states.
std::vector<double> objective_values(const Dtmc& d, const Objective& obj);

VerificationResult check(const ComposedModel& cm, const ObservationStrategy& sigma,
                         const Specification& spec);
VerificationResult check(const Pomdp& m, const ObservationStrategy& sigma, const Specification& spec);
// mdp-eval mode: per-state strategy on the underlying MDP.
VerificationResult check(const ComposedModel& cm, const MdpStrategy& sigma, const Specification& spec);

struct MdpSolution {
  std::vector<double> values;  // per composed state
  MdpStrategy strategy;        // per composed state
  double value = 0.0;          // expectation over the initial distribution
};

// Optimal values and a memoryless strategy of the underlying MDP of cm.
MdpSolution mdp_optimal(const ComposedModel& cm, const Specification& spec);
MdpSolution mdp_optimal(const Mdp& m, const Specification& spec);

}  // namespace psynth
