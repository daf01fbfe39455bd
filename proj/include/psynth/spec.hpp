#pragma once
// Property specifications and their deterministic memory automata.
//
// Grammar (whitespace-insensitive):
//   spec    := ('P' | 'E') bound '[' path ']'
//   bound   := 'max' | 'min' | ('<' | '<=' | '>=' | '>') number
//   path    := LTL over atomic propositions with ! & | U F G ( ) true false
// Only four path shapes are accepted:
//   !x U a  |  true U a  |  F a            -> Until / Eventually
//   F (a & F b)                            -> SeqReach
//   GF a & GF b & !F x  (any order)        -> RecurrenceSafety
// Expected-reward specs accept F a and F (a & F b).

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "psynth/model.hpp"

namespace psynth {

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SpecKind { Probability, ExpectedReward };
enum class Comparison { Max, Min, Less, LessEqual, GreaterEqual, Greater };
enum class Template { Until, Eventually, SeqReach, RecurrenceSafety };

struct Specification {
  SpecKind kind = SpecKind::Probability;
  Comparison cmp = Comparison::Max;
  double threshold = 0.0;  // meaningful unless cmp is Max/Min
  Template shape = Template::Eventually;
  // Until: avoid, goal. Eventually: goal. SeqReach: first, second.
  // RecurrenceSafety: first (A), second (B), avoid (X).
  std::string goal, avoid, first, second;
  std::string text;

  bool optimizes() const { return cmp == Comparison::Max || cmp == Comparison::Min; }
  // True when larger values are better (Pmax, P>=, Emax, ...).
  bool maximizes() const {
    return cmp == Comparison::Max || cmp == Comparison::Greater || cmp == Comparison::GreaterEqual;
  }
  // value ~ threshold; optimisation queries are always satisfied.
  bool satisfied_by(double value) const;
  std::vector<std::string> propositions() const;
};

Specification parse_spec(std::string_view text);
std::string to_string(const Specification& spec);

// Deterministic automaton over subsets of the relevant propositions. A label
// set is encoded as a bitmask over `props`.
struct SpecAutomaton {
  enum class Acceptance { Reach, Recurrence };
  std::size_t nodes = 1;
  std::size_t initial = 0;
  std::vector<std::string> props;
  std::vector<std::size_t> step_table;  // nodes x 2^props
  Acceptance acceptance = Acceptance::Reach;
  Specification spec;

  std::size_t step(std::size_t node, unsigned mask) const {
    return step_table[node * (std::size_t{1} << props.size()) + mask];
  }
};

SpecAutomaton build_automaton(const Specification& spec);

// Target sets of a composed model, one flag per composed state.
struct Objective {
  enum class Kind { Reach, Reward, Recurrence };
  Kind kind = Kind::Reach;
  std::vector<char> goal;   // Reach / Reward
  std::vector<char> avoid;  // Reach
  std::vector<char> rec1, rec2, safe;  // Recurrence
};

// Model x automaton. Composed state index is s * nodes + q; the automaton
// reads the labels of each state as it is entered.
struct ComposedModel {
  Pomdp model;
  Objective objective;
  std::vector<StateId> origin;     // composed -> original state
  std::vector<std::size_t> node;   // composed -> automaton node
  std::size_t nodes = 1;
};

ComposedModel compose(const Pomdp& m, const SpecAutomaton& aut);

}  // namespace psynth
