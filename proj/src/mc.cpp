#include "psynth/mc.hpp"

#include <chrono>
#include <string>

#include "chain_builder.hpp"

namespace psynth {

double initial_value(const Mdp& m, const std::vector<double>& v) {
  double sum = 0.0;
  for (const auto& t : m.initial_states())
    if (t.prob > 0.0) sum += t.prob * v[t.target];
  return sum;
}

double Dtmc::initial_value(const std::vector<double>& v) const {
  double sum = 0.0;
  for (const auto& t : initial_distribution)
    if (t.prob > 0.0) sum += t.prob * v[t.target];
  return sum;
}

Digraph Dtmc::graph() const {
  Digraph g;
  g.start = p.row_start;
  g.adj = p.col;
  return g;
}

namespace {

[[noreturn]] void disabled_action(const Mdp& m, StateId s, ActionId a) {
  throw ModelError("strategy puts mass on disabled action '" + m.actions.at(a) + "' in state " +
                   std::to_string(s));
}

void add_row(const Mdp& m, StateId s, std::span<const double> dist, detail::ChainBuilder& b) {
  for (ActionId a = 0; a < dist.size(); ++a) {
    const double w = dist[a];
    if (w == 0.0) continue;
    const Choice* ch = m.find_choice(s, a);
    if (!ch) disabled_action(m, s, a);
    for (const Transition& t : ch->successors) b.add(t.target, w * t.prob);
    b.add_reward(w * ch->reward);
  }
}

}  // namespace

Dtmc induced_dtmc(const Pomdp& m, const ObservationStrategy& sigma) {
  if (sigma.num_observations != m.num_observations || sigma.num_actions != m.num_actions())
    throw ModelError("strategy shape " + std::to_string(sigma.num_observations) + "x" +
                     std::to_string(sigma.num_actions) + " does not match model " +
                     std::to_string(m.num_observations) + "x" + std::to_string(m.num_actions()));
  detail::ChainBuilder b;
  for (StateId s = 0; s < m.num_states(); ++s) {
    add_row(m, s, sigma.row(m.observation[s]), b);
    b.finish_row(s, 0);
  }
  return b.finish(m.initial, m.initial_states());
}

Dtmc induced_dtmc(const Mdp& m, const MdpStrategy& sigma) {
  if (sigma.num_actions != m.num_actions() || sigma.table.size() != m.num_states() * m.num_actions())
    throw ModelError("per-state strategy does not match model");
  detail::ChainBuilder b;
  for (StateId s = 0; s < m.num_states(); ++s) {
    add_row(m, s, sigma.row(s), b);
    b.finish_row(s, 0);
  }
  return b.finish(m.initial, m.initial_states());
}

namespace {

// States reaching goal with probability one / zero.
struct Qualitative {
  std::vector<char> zero, one;
};

Qualitative qualitative_reach(const Dtmc& d, const std::vector<char>& goal, const std::vector<char>& avoid) {
  const std::size_t n = d.num_states();
  const Digraph rev = d.graph().reversed();
  std::vector<char> through(n);
  for (std::size_t s = 0; s < n; ++s) through[s] = !avoid[s] && !goal[s];
  const auto can = backward_reach(rev, goal, through);
  Qualitative q;
  q.zero.resize(n);
  for (std::size_t s = 0; s < n; ++s) q.zero[s] = !can[s];
  std::vector<char> not_goal(n);
  for (std::size_t s = 0; s < n; ++s) not_goal[s] = !goal[s];
  const auto risky = backward_reach(rev, q.zero, not_goal);
  q.one.resize(n);
  for (std::size_t s = 0; s < n; ++s) q.one[s] = !risky[s];
  return q;
}

}  // namespace

std::vector<double> reach_prob(const Dtmc& d, const std::vector<char>& goal,
                               const std::vector<char>& avoid, const SolveOptions& opt) {
  const std::size_t n = d.num_states();
  std::vector<char> clean_avoid(n);
  for (std::size_t s = 0; s < n; ++s) clean_avoid[s] = avoid[s] && !goal[s];
  const auto q = qualitative_reach(d, goal, clean_avoid);
  std::vector<double> x(n, 0.0), c(n, 0.0);
  std::vector<char> unknown(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    if (q.one[s]) x[s] = 1.0;
    else if (!q.zero[s]) unknown[s] = 1;
  }
  solve_fixed_point(d.p, unknown, c, x, opt);
  for (std::size_t s = 0; s < n; ++s)
    if (unknown[s]) x[s] = std::clamp(x[s], 0.0, 1.0);
  return x;
}

std::vector<double> expected_total_reward(const Dtmc& d, const std::vector<char>& goal,
                                          const SolveOptions& opt) {
  const std::size_t n = d.num_states();
  const auto q = qualitative_reach(d, goal, std::vector<char>(n, 0));
  std::vector<double> x(n, 0.0);
  std::vector<char> unknown(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    if (!q.one[s]) x[s] = kInfinity;
    else if (!goal[s]) unknown[s] = 1;
  }
  solve_fixed_point(d.p, unknown, d.reward, x, opt);
  return x;
}

std::vector<char> accepting_bsccs(const Dtmc& d, const std::vector<char>& rec1,
                                  const std::vector<char>& rec2, const std::vector<char>& safe) {
  const Digraph g = d.graph();
  std::size_t count = 0;
  const auto comp = scc_tarjan(g, &count);
  const auto bottom = bottom_components(g, comp, count);
  std::vector<char> has1(count, 0), has2(count, 0), all_safe(count, 1);
  for (std::size_t s = 0; s < d.num_states(); ++s) {
    has1[comp[s]] |= rec1[s];
    has2[comp[s]] |= rec2[s];
    if (!safe[s]) all_safe[comp[s]] = 0;
  }
  std::vector<char> acc(d.num_states());
  for (std::size_t s = 0; s < d.num_states(); ++s) {
    const std::size_t c = comp[s];
    acc[s] = bottom[c] && has1[c] && has2[c] && all_safe[c];
  }
  return acc;
}

std::vector<double> buchi_value(const Dtmc& d, const std::vector<char>& rec1,
                                const std::vector<char>& rec2, const std::vector<char>& safe,
                                const SolveOptions& opt) {
  const auto acc = accepting_bsccs(d, rec1, rec2, safe);
  std::vector<char> unsafe(d.num_states());
  for (std::size_t s = 0; s < d.num_states(); ++s) unsafe[s] = !safe[s];
  return reach_prob(d, acc, unsafe, opt);
}

std::vector<double> objective_values(const Dtmc& d, const Objective& obj) {
  auto lift = [&](const std::vector<char>& mask) {
    std::vector<char> out(d.num_states());
    for (std::size_t s = 0; s < d.num_states(); ++s) out[s] = mask[d.origin[s]];
    return out;
  };
  switch (obj.kind) {
    case Objective::Kind::Reach: return reach_prob(d, lift(obj.goal), lift(obj.avoid));
    case Objective::Kind::Reward: return expected_total_reward(d, lift(obj.goal));
    case Objective::Kind::Recurrence:
      return buchi_value(d, lift(obj.rec1), lift(obj.rec2), lift(obj.safe));
  }
  return {};
}

namespace {

VerificationResult finish_check(const Dtmc& d, const Objective& obj, const Specification& spec,
                                std::chrono::steady_clock::time_point start) {
  VerificationResult r;
  r.values = objective_values(d, obj);
  r.value = d.initial_value(r.values);
  r.satisfied = spec.satisfied_by(r.value);
  r.states = d.num_states();
  r.transitions = d.num_transitions();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

VerificationResult check(const ComposedModel& cm, const ObservationStrategy& sigma,
                         const Specification& spec) {
  const auto start = std::chrono::steady_clock::now();
  return finish_check(induced_dtmc(cm.model, sigma), cm.objective, spec, start);
}

VerificationResult check(const Pomdp& m, const ObservationStrategy& sigma, const Specification& spec) {
  return check(compose(m, build_automaton(spec)), sigma, spec);
}

VerificationResult check(const ComposedModel& cm, const MdpStrategy& sigma, const Specification& spec) {
  const auto start = std::chrono::steady_clock::now();
  return finish_check(induced_dtmc(static_cast<const Mdp&>(cm.model), sigma), cm.objective, spec, start);
}

}  // namespace psynth
