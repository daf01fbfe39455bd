#pragma once
// Counterexample-guided strategy improvement.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "psynth/dataset.hpp"
#include "psynth/fsc.hpp"
#include "psynth/mc.hpp"
#include "psynth/policy.hpp"
#include "psynth/spec.hpp"
#include "psynth/strategy.hpp"

namespace psynth {

// { s : values[s] > threshold[s] }
std::vector<StateId> critical_states(const std::vector<double>& values, const std::vector<double>& threshold);
std::vector<StateId> critical_states(const std::vector<double>& values, double threshold);

struct CriticalDecision {
  ObsId z;
  ActionId a;
  StateId s, next;  // witness: s has observation z, P(s, a, next) > 0, next critical
  bool operator==(const CriticalDecision&) const = default;
};

struct Counterexample {
  std::vector<StateId> states;
  std::vector<CriticalDecision> decisions;  // sorted by (z, a)
};

Counterexample critical_decisions(const Pomdp& m, const ObservationStrategy& sigma,
                                  const std::vector<StateId>& critical);

// One-step backups q[i][j] = -w * r(s_i, a_j) + sum_t P(s_i, a_j, t) u(t) over the
// states of class z and the actions enabled in all of them.
struct ClassBackups {
  std::vector<StateId> states;
  std::vector<ActionId> actions;
  std::vector<std::vector<double>> q;
};
ClassBackups class_backups(const Pomdp& m, const std::vector<double>& u, ObsId z, double reward_weight = 0.0);

struct Improvement {
  ObsId z = 0;
  std::vector<double> distribution;  // over all actions
  double old_min = 0.0, new_min = 0.0;
  std::size_t support = 0;
  bool kept_incumbent = false;
};

// Max-min improvement of sigma(z) against fixed oriented values u (larger is
// better). Never returns a distribution whose worst backup is below the
// incumbent's.
Improvement improve_lp(const Pomdp& m, const ObservationStrategy& sigma, const std::vector<double>& u, ObsId z,
                       double reward_weight = 0.0);

TrajectoryDataset resample_from_critical(const Pomdp& m, const ObservationStrategy& improved,
                                         const std::vector<StateId>& critical, const SampleOptions& opt);

enum class Criticality { Uniform, Relative };

struct IterationLog {
  std::size_t iteration = 0;
  double value = 0.0;
  std::size_t critical_states = 0;
  std::size_t critical_decisions = 0;
  std::size_t improved_classes = 0;
  double improved_value = std::numeric_limits<double>::quiet_NaN();  // verified value of the LP-improved strategy
  double train_loss = 0.0;
  double seconds = 0.0;
};

struct SynthesisConfig {
  std::size_t max_iterations = 10;
  double progress_epsilon = 0.0;  // stop when |v_i - v_(i-1)| < this
  bool early_stop = false;
  // Uniform: lambda' = lambda. Relative: lambda' follows the MDP optimum,
  // s is critical when its value is below relative_fraction of the optimum.
  // Optimisation queries always use Relative.
  Criticality criticality = Criticality::Uniform;
  double relative_fraction = 0.9;
  bool verify_improvements = true;  // keep an LP row only if the verified value does not drop
  std::size_t memory_nodes = 1;
  MemoryKind memory_kind = MemoryKind::ObservationRepeat;
  std::optional<SpecDrivenClasses> spec_classes;
  std::optional<MemoryUpdate> explicit_delta;
  // Warm-start retraining, epochs per iteration. Few epochs keep early iterations
  // honest about what the data supports; the loop supplies the rest.
  TrainConfig train = [] {
    TrainConfig t;
    t.epochs = 3;
    return t;
  }();
  std::size_t sample_count = 5000;  // initial dataset
  std::size_t resample_count = 2000;
  std::size_t max_len = 20;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  // Called after each iteration with its log row and verified strategy.
  std::function<void(const IterationLog&, const ObservationStrategy&)> on_iteration;
};

struct SynthesisResult {
  ObservationStrategy best;  // over the working model's observations
  std::optional<Fsc> best_fsc;
  std::size_t best_iteration = 0;
  double best_value = 0.0;
  bool satisfied = false;
  double mdp_value = 0.0;
  std::size_t working_states = 0;  // states of the (product) POMDP
  std::vector<IterationLog> log;
  std::vector<ObservationStrategy> strategies;  // one per iteration
  std::vector<std::size_t> improved_support;    // support size per improved class, all iterations
};

// The working model: m itself, or its product with the configured memory.
// Spec-driven memory without explicit classes uses the labels of the
// specification (first / second proposition, or goal).
Pomdp working_model(const Pomdp& m, const Specification& spec, const SynthesisConfig& cfg,
                    MemoryUpdate* delta = nullptr);

// Oriented values: larger is better, probabilities stay in [0, 1], costs are
// scaled into [-1, 0] with divergence at -2.
std::vector<double> orient(const std::vector<double>& values, const Specification& spec, double scale);
double cost_scale(const std::vector<double>& values);

SynthesisResult synthesize(const Pomdp& m, const Specification& spec, const SynthesisConfig& cfg);

}  // namespace psynth
