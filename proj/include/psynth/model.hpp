#pragma once
// Explicit-state MDP / POMDP representation.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace psynth {

using StateId = std::size_t;
using ActionId = std::size_t;
using ObsId = std::size_t;

inline constexpr double kStochasticTolerance = 1e-9;

// Raised for malformed or inconsistent models.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Transition {
  StateId target;
  double prob;
  bool operator==(const Transition&) const = default;
};

// One enabled action of a state together with its successor distribution.
struct Choice {
  ActionId action;
  std::vector<Transition> successors;
  double reward = 0.0;
  bool operator==(const Choice&) const = default;
};

struct Mdp {
  std::string name;
  std::vector<std::string> actions;
  // choices[s] lists the enabled actions of s in increasing action order.
  std::vector<std::vector<Choice>> choices;
  // Atomic proposition -> sorted list of states where it holds.
  std::map<std::string, std::vector<StateId>> labels;
  StateId initial = 0;
  // Optional start distribution; empty means a point mass on `initial`.
  std::vector<Transition> initial_distribution;

  std::size_t num_states() const { return choices.size(); }
  std::vector<Transition> initial_states() const {
    if (initial_distribution.empty()) return {{initial, 1.0}};
    return initial_distribution;
  }
  std::size_t num_actions() const { return actions.size(); }
  std::size_t num_transitions() const;

  const Choice* find_choice(StateId s, ActionId a) const;
  bool enabled(StateId s, ActionId a) const { return find_choice(s, a) != nullptr; }
  bool has_label(const std::string& ap) const { return labels.count(ap) != 0; }
  // Throws ModelError for unknown propositions.
  std::vector<char> label_mask(const std::string& ap) const;
  ActionId action_index(const std::string& name) const;
  // True when every enabled action loops back to s with probability one.
  bool absorbing(StateId s) const;

  bool operator==(const Mdp&) const = default;
};

struct Pomdp : Mdp {
  std::vector<ObsId> observation;  // total map S -> Z
  std::size_t num_observations = 0;

  // States grouped by observation; classes[z] may be empty.
  std::vector<std::vector<StateId>> observation_classes() const;
  // Actions enabled in every state of the class; falls back to the union when
  // the intersection is empty.
  std::vector<ActionId> class_actions(ObsId z) const;

  bool operator==(const Pomdp&) const = default;
};

struct Diagnostic {
  enum class Kind { Stochasticity, NegativeProbability, Deadlock, DanglingState, BadObservation,
                    NonFiniteReward, BadLabel, BadInitial, DuplicateAction };
  Kind kind;
  std::string message;
  StateId state = 0;
  ActionId action = 0;
};

std::vector<Diagnostic> validate(const Mdp& m, double tol = kStochasticTolerance);
std::vector<Diagnostic> validate(const Pomdp& m, double tol = kStochasticTolerance);

Mdp underlying_mdp(const Pomdp& m);

// Fully observable POMDP: every state is its own observation.
Pomdp fully_observable(const Mdp& m);

}  // namespace psynth
