// Optimal values and strategies of the underlying MDP.
#include <algorithm>
#include <cmath>

#include "psynth/mc.hpp"

namespace psynth {

namespace {

Digraph union_graph(const Mdp& m) {
  Digraph g;
  for (StateId s = 0; s < m.num_states(); ++s) {
    for (const Choice& ch : m.choices[s])
      for (const Transition& t : ch.successors)
        if (t.prob > 0) g.adj.push_back(t.target);
    g.start.push_back(g.adj.size());
  }
  return g;
}

bool all_in(const Choice& ch, const std::vector<char>& set) {
  for (const Transition& t : ch.successors)
    if (t.prob > 0 && !set[t.target]) return false;
  return true;
}

bool any_in(const Choice& ch, const std::vector<char>& set) {
  for (const Transition& t : ch.successors)
    if (t.prob > 0 && set[t.target]) return true;
  return false;
}

std::vector<char> negate(const std::vector<char>& v) {
  std::vector<char> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = !v[i];
  return out;
}

// States where some strategy reaches goal with probability one, avoiding avoid.
std::vector<char> prob1_exists(const Mdp& m, const std::vector<char>& goal, const std::vector<char>& avoid) {
  const std::size_t n = m.num_states();
  std::vector<char> u(n, 1);
  for (;;) {
    std::vector<char> r(goal);
    bool grew = true;
    while (grew) {
      grew = false;
      for (StateId s = 0; s < n; ++s) {
        if (r[s] || !u[s] || avoid[s]) continue;
        for (const Choice& ch : m.choices[s])
          if (all_in(ch, u) && any_in(ch, r)) {
            r[s] = 1;
            grew = true;
            break;
          }
      }
    }
    if (r == u) return u;
    u = r;
  }
}

// States where some strategy avoids goal forever (avoid states count as
// stopping without reaching goal).
std::vector<char> avoid_exists(const Mdp& m, const std::vector<char>& goal, const std::vector<char>& avoid) {
  const std::size_t n = m.num_states();
  std::vector<char> z = negate(goal);
  bool shrunk = true;
  while (shrunk) {
    shrunk = false;
    for (StateId s = 0; s < n; ++s) {
      if (!z[s] || avoid[s]) continue;
      bool keep = false;
      for (const Choice& ch : m.choices[s])
        if (all_in(ch, z)) {
          keep = true;
          break;
        }
      if (!keep) {
        z[s] = 0;
        shrunk = true;
      }
    }
  }
  return z;
}

struct Problem {
  const Mdp& m;
  bool maximize = true;
  bool with_reward = false;
  std::vector<char> unknown;
  std::vector<char> progress_target;      // attractor seeds; empty = no attractor
  std::vector<std::vector<char>> allowed;  // per state, per choice index
  std::vector<double> x;
};

double backup(const Problem& pb, StateId s, std::size_t c) {
  const Choice& ch = pb.m.choices[s][c];
  double v = pb.with_reward ? ch.reward : 0.0;
  for (const Transition& t : ch.successors) v += t.prob * pb.x[t.target];
  return v;
}

bool better(const Problem& pb, double a, double b) { return pb.maximize ? a > b : a < b; }

void value_iteration(Problem& pb) {
  const std::size_t n = pb.m.num_states();
  std::size_t nnz = 1;
  for (StateId s = 0; s < n; ++s)
    if (pb.unknown[s])
      for (const Choice& ch : pb.m.choices[s]) nnz += ch.successors.size();
  // Exact policy evaluation afterwards removes the remaining error.
  const std::size_t max_sweeps = std::clamp<std::size_t>(400'000'000 / nnz, 1000, 1'000'000);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (StateId s = 0; s < n; ++s) {
      if (!pb.unknown[s]) continue;
      bool first = true;
      double best = 0.0;
      for (std::size_t c = 0; c < pb.m.choices[s].size(); ++c) {
        if (!pb.allowed[s][c]) continue;
        const double v = backup(pb, s, c);
        if (first || better(pb, v, best)) best = v;
        first = false;
      }
      change = std::max(change, std::abs(best - pb.x[s]) / std::max(1.0, std::abs(best)));
      pb.x[s] = best;
    }
    if (change < 1e-12) break;
  }
}

// Deterministic choice per state: optimal actions, then progress towards the
// attractor seeds, then lowest action index.
std::vector<std::size_t> select_choices(const Problem& pb) {
  const std::size_t n = pb.m.num_states();
  std::vector<std::vector<char>> optimal(n);
  for (StateId s = 0; s < n; ++s) {
    const auto& choices = pb.m.choices[s];
    optimal[s].assign(choices.size(), 0);
    bool first = true;
    double best = 0.0;
    for (std::size_t c = 0; c < choices.size(); ++c) {
      if (!pb.allowed[s][c]) continue;
      const double v = backup(pb, s, c);
      if (first || better(pb, v, best)) best = v;
      first = false;
    }
    const double tol = best == 0.0 ? 0.0 : 1e-10 * std::max(1.0, std::abs(best));
    for (std::size_t c = 0; c < choices.size(); ++c)
      if (pb.allowed[s][c] && std::abs(backup(pb, s, c) - best) <= tol) optimal[s][c] = 1;
  }
  std::vector<std::size_t> pick(n, 0);
  std::vector<char> decided(n, 0);
  if (!pb.progress_target.empty()) {
    std::vector<char> ranked(pb.progress_target);
    bool grew = true;
    while (grew) {
      grew = false;
      std::vector<StateId> layer;
      for (StateId s = 0; s < n; ++s) {
        if (ranked[s]) continue;
        for (std::size_t c = 0; c < pb.m.choices[s].size(); ++c)
          if (optimal[s][c] && any_in(pb.m.choices[s][c], ranked)) {
            pick[s] = c;
            decided[s] = 1;
            layer.push_back(s);
            break;
          }
      }
      for (StateId s : layer) ranked[s] = 1;
      grew = !layer.empty();
    }
  }
  for (StateId s = 0; s < n; ++s) {
    if (decided[s]) continue;
    for (std::size_t c = 0; c < pb.m.choices[s].size(); ++c)
      if (optimal[s][c]) {
        pick[s] = c;
        decided[s] = 1;
        break;
      }
    if (!decided[s]) pick[s] = 0;
  }
  return pick;
}

MdpStrategy to_strategy(const Mdp& m, const std::vector<std::size_t>& pick) {
  MdpStrategy st{m.num_actions(), std::vector<double>(m.num_states() * m.num_actions(), 0.0)};
  for (StateId s = 0; s < m.num_states(); ++s)
    if (!m.choices[s].empty()) st.row(s)[m.choices[s][pick[s]].action] = 1.0;
  return st;
}

// Exact evaluation of the picked strategy followed by strict policy
// improvement on the unknown states.
template <class Evaluate>
std::vector<std::size_t> polish(Problem& pb, std::vector<std::size_t> pick, Evaluate evaluate) {
  const std::size_t n = pb.m.num_states();
  for (int round = 0; round < 50; ++round) {
    const auto exact = evaluate(to_strategy(pb.m, pick));
    for (StateId s = 0; s < n; ++s)
      if (pb.unknown[s]) pb.x[s] = exact[s];
    bool switched = false;
    for (StateId s = 0; s < n; ++s) {
      if (!pb.unknown[s]) continue;
      const double current = backup(pb, s, pick[s]);
      std::size_t best_c = pick[s];
      double best = current;
      for (std::size_t c = 0; c < pb.m.choices[s].size(); ++c) {
        if (!pb.allowed[s][c]) continue;
        const double v = backup(pb, s, c);
        if (better(pb, v, best) && std::abs(v - current) > 1e-11 * std::max(1.0, std::abs(current))) {
          best = v;
          best_c = c;
        }
      }
      if (best_c != pick[s]) {
        pick[s] = best_c;
        switched = true;
      }
    }
    if (!switched) break;
  }
  return pick;
}

std::vector<std::vector<char>> all_allowed(const Mdp& m) {
  std::vector<std::vector<char>> a(m.num_states());
  for (StateId s = 0; s < m.num_states(); ++s) a[s].assign(m.choices[s].size(), 1);
  return a;
}

MdpSolution solve_reach(const Mdp& m, const std::vector<char>& goal_in, const std::vector<char>& avoid_in,
                        bool maximize) {
  const std::size_t n = m.num_states();
  std::vector<char> goal(goal_in), avoid(n);
  for (StateId s = 0; s < n; ++s) avoid[s] = avoid_in[s] && !goal[s];
  Problem pb{m, maximize, false, std::vector<char>(n, 0), {}, all_allowed(m), std::vector<double>(n, 0.0)};
  std::vector<char> zero, one;
  if (maximize) {
    const Digraph rev = union_graph(m).reversed();
    std::vector<char> through(n);
    for (StateId s = 0; s < n; ++s) through[s] = !avoid[s] && !goal[s];
    zero = negate(backward_reach(rev, goal, through));
    one = prob1_exists(m, goal, avoid);
    pb.progress_target = goal;
  } else {
    zero = avoid_exists(m, goal, avoid);
    const Digraph rev = union_graph(m).reversed();
    const auto can_escape = backward_reach(rev, zero, negate(goal));
    one = negate(can_escape);
  }
  for (StateId s = 0; s < n; ++s) {
    if (one[s]) pb.x[s] = 1.0;
    else if (!zero[s]) pb.unknown[s] = 1;
  }
  if (!maximize) {
    // Zero states must stay within the zero region.
    for (StateId s = 0; s < n; ++s)
      if (zero[s] && !avoid[s])
        for (std::size_t c = 0; c < m.choices[s].size(); ++c) pb.allowed[s][c] = all_in(m.choices[s][c], zero);
  }
  value_iteration(pb);
  auto pick = select_choices(pb);
  pick = polish(pb, pick, [&](const MdpStrategy& st) { return reach_prob(induced_dtmc(m, st), goal, avoid); });
  MdpSolution sol;
  sol.strategy = to_strategy(m, pick);
  sol.values = reach_prob(induced_dtmc(m, sol.strategy), goal, avoid);
  return sol;
}

MdpSolution solve_reward(const Mdp& m, const std::vector<char>& goal, bool maximize) {
  const std::size_t n = m.num_states();
  const std::vector<char> none(n, 0);
  std::vector<char> finite;
  if (maximize) {
    const auto z = avoid_exists(m, goal, none);
    const Digraph rev = union_graph(m).reversed();
    finite = negate(backward_reach(rev, z, negate(goal)));
  } else {
    finite = prob1_exists(m, goal, none);
  }
  Problem pb{m, maximize, true, std::vector<char>(n, 0), {}, all_allowed(m), std::vector<double>(n, 0.0)};
  for (StateId s = 0; s < n; ++s) {
    if (!finite[s]) pb.x[s] = kInfinity;
    else if (!goal[s]) pb.unknown[s] = 1;
    for (std::size_t c = 0; c < m.choices[s].size(); ++c)
      pb.allowed[s][c] = !finite[s] || all_in(m.choices[s][c], finite);
  }
  if (!maximize) pb.progress_target = goal;
  value_iteration(pb);
  auto pick = select_choices(pb);
  pick = polish(pb, pick, [&](const MdpStrategy& st) { return expected_total_reward(induced_dtmc(m, st), goal); });
  MdpSolution sol;
  sol.strategy = to_strategy(m, pick);
  sol.values = expected_total_reward(induced_dtmc(m, sol.strategy), goal);
  return sol;
}

MdpSolution solve_recurrence(const Mdp& m, const Objective& obj) {
  const std::size_t n = m.num_states();
  const auto mecs = mec_decomposition(m, obj.safe);
  std::vector<char> accepting(n, 0);
  std::vector<const EndComponent*> owner(n, nullptr);
  std::vector<std::size_t> slot(n, 0);
  for (const auto& ec : mecs) {
    bool r1 = false, r2 = false;
    for (StateId s : ec.states) {
      r1 = r1 || obj.rec1[s];
      r2 = r2 || obj.rec2[s];
    }
    if (!(r1 && r2)) continue;
    for (std::size_t i = 0; i < ec.states.size(); ++i) {
      accepting[ec.states[i]] = 1;
      owner[ec.states[i]] = &ec;
      slot[ec.states[i]] = i;
    }
  }
  MdpSolution sol = solve_reach(m, accepting, negate(obj.safe), true);
  for (StateId s = 0; s < n; ++s) {
    if (!accepting[s]) continue;
    auto row = sol.strategy.row(s);
    std::fill(row.begin(), row.end(), 0.0);
    const auto& acts = owner[s]->actions[slot[s]];
    for (ActionId a : acts) row[a] = 1.0 / static_cast<double>(acts.size());
  }
  sol.values = buchi_value(induced_dtmc(m, sol.strategy), obj.rec1, obj.rec2, obj.safe);
  return sol;
}

}  // namespace

MdpSolution mdp_optimal(const ComposedModel& cm, const Specification& spec) {
  const Mdp& m = cm.model;
  const Objective& obj = cm.objective;
  const bool maximize = spec.maximizes();
  MdpSolution sol;
  switch (obj.kind) {
    case Objective::Kind::Reach: sol = solve_reach(m, obj.goal, obj.avoid, maximize); break;
    case Objective::Kind::Reward: sol = solve_reward(m, obj.goal, maximize); break;
    case Objective::Kind::Recurrence:
      if (!maximize) throw SpecError("minimising recurrence objectives is not supported");
      sol = solve_recurrence(m, obj);
      break;
  }
  sol.value = initial_value(m, sol.values);
  return sol;
}

MdpSolution mdp_optimal(const Mdp& m, const Specification& spec) {
  return mdp_optimal(compose(fully_observable(m), build_automaton(spec)), spec);
}

}  // namespace psynth
