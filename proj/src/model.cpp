#include "psynth/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace psynth {

std::size_t Mdp::num_transitions() const {
  std::size_t n = 0;
  for (const auto& cs : choices)
    for (const auto& c : cs) n += c.successors.size();
  return n;
}

const Choice* Mdp::find_choice(StateId s, ActionId a) const {
  const auto& cs = choices.at(s);
  auto it = std::lower_bound(cs.begin(), cs.end(), a,
                             [](const Choice& c, ActionId act) { return c.action < act; });
  return it != cs.end() && it->action == a ? &*it : nullptr;
}

std::vector<char> Mdp::label_mask(const std::string& ap) const {
  auto it = labels.find(ap);
  if (it == labels.end()) throw ModelError("unknown atomic proposition '" + ap + "'");
  std::vector<char> mask(num_states(), 0);
  for (StateId s : it->second) mask.at(s) = 1;
  return mask;
}

ActionId Mdp::action_index(const std::string& name) const {
  auto it = std::find(actions.begin(), actions.end(), name);
  if (it == actions.end()) throw ModelError("unknown action '" + name + "'");
  return static_cast<ActionId>(it - actions.begin());
}

bool Mdp::absorbing(StateId s) const {
  for (const auto& c : choices[s]) {
    for (const auto& t : c.successors)
      if (t.target != s && t.prob > 0.0) return false;
  }
  return true;
}

std::vector<std::vector<StateId>> Pomdp::observation_classes() const {
  std::vector<std::vector<StateId>> classes(num_observations);
  for (StateId s = 0; s < observation.size(); ++s) classes.at(observation[s]).push_back(s);
  return classes;
}

std::vector<ActionId> Pomdp::class_actions(ObsId z) const {
  std::vector<char> all(num_actions(), 1), any(num_actions(), 0);
  bool seen = false;
  for (StateId s = 0; s < num_states(); ++s) {
    if (observation[s] != z) continue;
    seen = true;
    std::vector<char> here(num_actions(), 0);
    for (const auto& c : choices[s]) here[c.action] = 1;
    for (ActionId a = 0; a < num_actions(); ++a) {
      all[a] = all[a] && here[a];
      any[a] = any[a] || here[a];
    }
  }
  std::vector<ActionId> out;
  if (!seen) {
    for (ActionId a = 0; a < num_actions(); ++a) out.push_back(a);
    return out;
  }
  for (ActionId a = 0; a < num_actions(); ++a)
    if (all[a]) out.push_back(a);
  if (out.empty())
    for (ActionId a = 0; a < num_actions(); ++a)
      if (any[a]) out.push_back(a);
  return out;
}

namespace {

void add(std::vector<Diagnostic>& out, Diagnostic::Kind kind, StateId s, ActionId a,
         std::string msg) {
  out.push_back(Diagnostic{kind, std::move(msg), s, a});
}

}  // namespace

std::vector<Diagnostic> validate(const Mdp& m, double tol) {
  using K = Diagnostic::Kind;
  std::vector<Diagnostic> out;
  const std::size_t n = m.num_states();
  if (n == 0) {
    add(out, K::BadInitial, 0, 0, "model has no states");
    return out;
  }
  if (m.initial >= n)
    add(out, K::BadInitial, m.initial, 0, "initial state " + std::to_string(m.initial) +
                                              " out of range");
  if (!m.initial_distribution.empty()) {
    double sum = 0.0;
    for (const auto& t : m.initial_distribution) {
      if (t.target >= n || !(t.prob >= 0.0))
        add(out, K::BadInitial, t.target, 0, "bad initial distribution entry for state " +
                                                 std::to_string(t.target));
      sum += t.prob;
    }
    if (std::abs(sum - 1.0) > tol)
      add(out, K::BadInitial, 0, 0, "initial distribution sums to " + std::to_string(sum));
  }
  for (StateId s = 0; s < n; ++s) {
    const auto& cs = m.choices[s];
    if (cs.empty()) {
      add(out, K::Deadlock, s, 0, "deadlock: state " + std::to_string(s) + " has no enabled action");
      continue;
    }
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const Choice& c = cs[i];
      const std::string where = "state " + std::to_string(s) + " action " +
                                (c.action < m.num_actions() ? m.actions[c.action]
                                                            : std::to_string(c.action));
      if (c.action >= m.num_actions()) {
        add(out, K::DanglingState, s, c.action, where + ": undeclared action");
        continue;
      }
      if (i > 0 && cs[i - 1].action >= c.action)
        add(out, K::DuplicateAction, s, c.action, where + ": duplicate or unsorted choice");
      if (!std::isfinite(c.reward))
        add(out, K::NonFiniteReward, s, c.action, where + ": non-finite reward");
      double sum = 0.0;
      bool bad = false;
      for (const auto& t : c.successors) {
        if (t.target >= n) {
          add(out, K::DanglingState, s, c.action,
              where + ": successor " + std::to_string(t.target) + " out of range");
          bad = true;
        }
        if (!(t.prob >= 0.0 && t.prob <= 1.0)) {
          add(out, K::NegativeProbability, s, c.action,
              where + ": probability " + std::to_string(t.prob) + " outside [0,1]");
          bad = true;
        }
        sum += t.prob;
      }
      if (!bad && std::abs(sum - 1.0) > tol) {
        std::ostringstream os;
        os.precision(12);
        os << where << ": row sums to " << sum;
        add(out, K::Stochasticity, s, c.action, os.str());
      }
    }
  }
  for (const auto& [ap, states] : m.labels) {
    for (StateId s : states)
      if (s >= n) add(out, K::BadLabel, s, 0, "label '" + ap + "' references state " +
                                                  std::to_string(s) + " out of range");
  }
  return out;
}

std::vector<Diagnostic> validate(const Pomdp& m, double tol) {
  auto out = validate(static_cast<const Mdp&>(m), tol);
  if (m.observation.size() != m.num_states()) {
    out.push_back(Diagnostic{Diagnostic::Kind::BadObservation,
                             "observation map covers " + std::to_string(m.observation.size()) +
                                 " of " + std::to_string(m.num_states()) + " states",
                             0, 0});
    return out;
  }
  for (StateId s = 0; s < m.observation.size(); ++s)
    if (m.observation[s] >= m.num_observations)
      out.push_back(Diagnostic{Diagnostic::Kind::BadObservation,
                               "state " + std::to_string(s) + " observes " +
                                   std::to_string(m.observation[s]) + " outside alphabet of size " +
                                   std::to_string(m.num_observations),
                               s, 0});
  return out;
}

Mdp underlying_mdp(const Pomdp& m) { return static_cast<const Mdp&>(m); }

Pomdp fully_observable(const Mdp& m) {
  Pomdp p;
  static_cast<Mdp&>(p) = m;
  p.num_observations = m.num_states();
  p.observation.resize(m.num_states());
  for (StateId s = 0; s < m.num_states(); ++s) p.observation[s] = s;
  return p;
}

}  // namespace psynth
