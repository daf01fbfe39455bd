#include "psynth/refine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <atomic>
#include <future>
#include <map>

#include "psynth/extract.hpp"
#include "psynth/lp.hpp"

namespace psynth {

std::vector<StateId> critical_states(const std::vector<double>& values, const std::vector<double>& threshold) {
  if (values.size() != threshold.size()) throw std::invalid_argument("threshold vector size mismatch");
  std::vector<StateId> out;
  for (StateId s = 0; s < values.size(); ++s)
    if (values[s] > threshold[s]) out.push_back(s);
  return out;
}

std::vector<StateId> critical_states(const std::vector<double>& values, double threshold) {
  return critical_states(values, std::vector<double>(values.size(), threshold));
}

Counterexample critical_decisions(const Pomdp& m, const ObservationStrategy& sigma,
                                  const std::vector<StateId>& critical) {
  Counterexample cx;
  cx.states = critical;
  std::vector<char> crit(m.num_states(), 0);
  for (StateId s : critical) crit.at(s) = 1;
  std::map<std::pair<ObsId, ActionId>, CriticalDecision> found;
  for (StateId s = 0; s < m.num_states(); ++s) {
    const ObsId z = m.observation[s];
    for (const Choice& ch : m.choices[s]) {
      if (sigma(z, ch.action) <= 0.0 || found.count({z, ch.action})) continue;
      for (const Transition& t : ch.successors)
        if (t.prob > 0 && crit[t.target]) {
          found.emplace(std::make_pair(z, ch.action), CriticalDecision{z, ch.action, s, t.target});
          break;
        }
    }
  }
  for (const auto& [key, d] : found) cx.decisions.push_back(d);
  return cx;
}

ClassBackups class_backups(const Pomdp& m, const std::vector<double>& u, ObsId z, double reward_weight) {
  ClassBackups b;
  for (StateId s = 0; s < m.num_states(); ++s)
    if (m.observation[s] == z) b.states.push_back(s);
  if (b.states.empty()) return b;
  for (ActionId a = 0; a < m.num_actions(); ++a) {
    bool everywhere = true;
    for (StateId s : b.states) everywhere = everywhere && m.enabled(s, a);
    if (everywhere) b.actions.push_back(a);
  }
  for (StateId s : b.states) {
    std::vector<double> row;
    for (ActionId a : b.actions) {
      const Choice* ch = m.find_choice(s, a);
      double v = -reward_weight * ch->reward;
      for (const Transition& t : ch->successors) v += t.prob * u[t.target];
      row.push_back(v);
    }
    b.q.push_back(std::move(row));
  }
  return b;
}

Improvement improve_lp(const Pomdp& m, const ObservationStrategy& sigma, const std::vector<double>& u, ObsId z,
                       double reward_weight) {
  Improvement imp;
  imp.z = z;
  const auto row = sigma.row(z);
  imp.distribution.assign(row.begin(), row.end());
  const ClassBackups b = class_backups(m, u, z, reward_weight);
  auto support = [](const std::vector<double>& d) {
    return static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [](double p) { return p > 0.0; }));
  };
  imp.support = support(imp.distribution);
  imp.kept_incumbent = true;
  if (b.states.empty() || b.actions.empty()) return imp;

  std::vector<double> incumbent;
  double outside = 0.0;
  for (ActionId a = 0; a < m.num_actions(); ++a) {
    if (std::find(b.actions.begin(), b.actions.end(), a) == b.actions.end()) outside += row[a];
  }
  for (ActionId a : b.actions) incumbent.push_back(row[a]);
  imp.old_min = outside > 0.0 ? -kInfinity : min_payoff(b.q, incumbent);
  imp.new_min = imp.old_min;

  const MaxMinResult lp = max_min(b.q);
  // Drop numerically negligible weights when that does not hurt.
  std::vector<double> clean = lp.weights;
  double sum = 0.0;
  for (double& p : clean) {
    if (p < 1e-12) p = 0.0;
    sum += p;
  }
  for (double& p : clean) p /= sum;
  const std::vector<double>* pick = nullptr;
  double pick_min = imp.old_min;
  if (const double v = min_payoff(b.q, clean); v >= imp.old_min) {
    pick = &clean;
    pick_min = v;
  } else if (const double r = min_payoff(b.q, lp.weights); r >= imp.old_min) {
    pick = &lp.weights;
    pick_min = r;
  }
  if (!pick) return imp;
  std::fill(imp.distribution.begin(), imp.distribution.end(), 0.0);
  for (std::size_t j = 0; j < b.actions.size(); ++j) imp.distribution[b.actions[j]] = (*pick)[j];
  imp.new_min = pick_min;
  imp.support = support(imp.distribution);
  imp.kept_incumbent = false;
  return imp;
}

TrajectoryDataset resample_from_critical(const Pomdp& m, const ObservationStrategy& improved,
                                         const std::vector<StateId>& critical, const SampleOptions& opt) {
  if (critical.empty()) throw std::invalid_argument("resampling needs at least one critical state");
  SampleOptions o = opt;
  o.starts = critical;
  auto d = to_observation_sequences(sample_trajectories(m, lift(m, improved), o), m);
  d.seed = opt.seed;
  return d;
}

Pomdp working_model(const Pomdp& m, const Specification& spec, const SynthesisConfig& cfg, MemoryUpdate* delta) {
  const std::size_t k = cfg.memory_nodes;
  MemoryUpdate d;
  if (cfg.explicit_delta) {
    d = *cfg.explicit_delta;
    if (d.nodes != k) throw std::invalid_argument("explicit memory update has the wrong node count");
  } else if (cfg.memory_kind == MemoryKind::SpecDriven && k > 1) {
    SpecDrivenClasses classes;
    if (cfg.spec_classes) classes = *cfg.spec_classes;
    else if (spec.shape == Template::SeqReach) classes = spec_driven_classes(m, spec.first, spec.second);
    else classes = spec_driven_classes(m, spec.goal, "");
    d = memory_update(MemoryKind::SpecDriven, k, m, &classes);
  } else {
    d = memory_update(cfg.memory_kind, k, m);
  }
  if (delta) *delta = d;
  return k == 1 ? m : product(m, d);
}

double cost_scale(const std::vector<double>& values) {
  double hi = 1.0;
  for (double v : values)
    if (std::isfinite(v)) hi = std::max(hi, std::abs(v));
  return hi;
}

std::vector<double> orient(const std::vector<double>& values, const Specification& spec, double scale) {
  std::vector<double> u(values.size());
  const bool up = spec.maximizes();
  for (std::size_t s = 0; s < values.size(); ++s) {
    const double v = values[s];
    if (spec.kind == SpecKind::Probability) u[s] = up ? v : 1.0 - v;
    else if (std::isinf(v)) u[s] = up ? 2.0 : -2.0;
    else u[s] = (up ? v : -v) / scale;
  }
  return u;
}

namespace {

bool better_value(const Specification& spec, double a, double b) {
  return spec.maximizes() ? a > b : a < b;
}

double oriented_threshold(const Specification& spec, double scale) {
  const double l = spec.threshold;
  if (spec.kind == SpecKind::Probability) return spec.maximizes() ? l : 1.0 - l;
  return (spec.maximizes() ? l : -l) / scale;
}

}  // namespace

SynthesisResult synthesize(const Pomdp& m, const Specification& spec, const SynthesisConfig& cfg) {
  if (cfg.max_iterations == 0) throw std::invalid_argument("need at least one iteration");
  if (cfg.progress_epsilon < 0) throw std::invalid_argument("progress threshold must be nonnegative");
  MemoryUpdate delta;
  const Pomdp work = working_model(m, spec, cfg, &delta);
  const ComposedModel cm = compose(work, build_automaton(spec));
  const Pomdp& model = cm.model;
  const std::size_t n = model.num_states();

  SynthesisResult result;
  result.working_states = work.num_states();
  const MdpSolution mdp = mdp_optimal(cm, spec);
  result.mdp_value = mdp.value;

  std::vector<char> stop(n, 0);
  if (cm.objective.kind != Objective::Kind::Recurrence)
    for (StateId s = 0; s < n; ++s)
      stop[s] = cm.objective.goal[s] || (!cm.objective.avoid.empty() && cm.objective.avoid[s]);

  SampleOptions sopt;
  sopt.count = cfg.sample_count;
  sopt.max_len = cfg.max_len;
  sopt.seed = cfg.seed;
  sopt.stop = stop;
  TrajectoryDataset data = to_observation_sequences(sample_trajectories(model, mdp.strategy, sopt), model);
  data.seed = cfg.seed;

  RecurrentPolicy policy(model.num_observations, model.num_actions(), cfg.train.hidden, cfg.seed, cfg.memory_nodes);
  const bool relative = spec.optimizes() || cfg.criticality == Criticality::Relative;
  const double fraction = cfg.relative_fraction;

  double previous = 0.0;
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    const auto start = std::chrono::steady_clock::now();
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed * 1000003 + it;
    TrainReport rep;
    try {
      rep = train(policy, data, tc);
    } catch (const TrainingError&) {
      if (result.log.empty()) throw;
      break;
    }
    const ObservationStrategy sigma = extract_strategy(policy, model, cfg.memory_nodes);
    const VerificationResult res = check(cm, sigma, spec);

    IterationLog row;
    row.iteration = it;
    row.value = res.value;
    row.train_loss = rep.final_loss;

    if (result.log.empty() || better_value(spec, res.value, result.best_value)) {
      result.best = sigma;
      result.best_value = res.value;
      result.best_iteration = it;
    }
    const bool reached = spec.optimizes() ? std::abs(res.value - mdp.value) <= 1e-9 : res.satisfied;

    // Counterexample from the verified values.
    const double scale = std::max(cost_scale(res.values), cost_scale(mdp.values));
    const auto u = orient(res.values, spec, scale);
    std::vector<double> neg_u(n), neg_threshold(n);
    const auto u_mdp = orient(mdp.values, spec, scale);
    const double flat = spec.optimizes() ? 0.0 : oriented_threshold(spec, scale);
    for (StateId s = 0; s < n; ++s) {
      neg_u[s] = -u[s];
      const double lt = relative ? u_mdp[s] - (1.0 - fraction) * std::abs(u_mdp[s]) : flat;
      neg_threshold[s] = -lt;
    }
    const auto crit = critical_states(neg_u, neg_threshold);
    const Counterexample cx = critical_decisions(model, sigma, crit);
    row.critical_states = crit.size();
    row.critical_decisions = cx.decisions.size();

    const bool last = it == cfg.max_iterations || (cfg.early_stop && reached) ||
                      (it > 1 && std::abs(res.value - previous) < cfg.progress_epsilon);
    previous = res.value;

    if (!last && !crit.empty()) {
      // Improve every class with critical decisions, busiest first.
      std::map<ObsId, std::size_t> count;
      for (const auto& d : cx.decisions) ++count[d.z];
      std::vector<std::pair<std::size_t, ObsId>> order;
      for (const auto& [z, c] : count) order.emplace_back(c, z);
      std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      const double w = spec.kind == SpecKind::ExpectedReward ? (spec.maximizes() ? -1.0 : 1.0) / scale : 0.0;
      std::vector<Improvement> imps(order.size());
      if (cfg.threads > 1) {
        std::vector<std::future<void>> jobs;
        std::atomic<std::size_t> next{0};
        for (std::size_t t = 0; t < cfg.threads; ++t)
          jobs.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i; (i = next++) < order.size();) imps[i] = improve_lp(model, sigma, u, order[i].second, w);
          }));
        for (auto& j : jobs) j.get();
      } else {
        for (std::size_t i = 0; i < order.size(); ++i) imps[i] = improve_lp(model, sigma, u, order[i].second, w);
      }
      // Apply LP rows busiest class first. With verification on, a row is kept only if the
      // verified value does not get worse: the one-step max-min alone happily picks stalling actions.
      ObservationStrategy improved = sigma;
      double current = res.value;
      for (const auto& imp : imps) {
        if (imp.kept_incumbent) continue;
        auto r = improved.row(imp.z);
        const std::vector<double> saved(r.begin(), r.end());
        std::copy(imp.distribution.begin(), imp.distribution.end(), r.begin());
        if (cfg.verify_improvements) {
          const double v = check(cm, improved, spec).value;
          if (better_value(spec, current, v)) {
            std::copy(saved.begin(), saved.end(), r.begin());
            continue;
          }
          current = v;
        }
        result.improved_support.push_back(imp.support);
        ++row.improved_classes;
      }
      if (row.improved_classes) row.improved_value = cfg.verify_improvements ? current : check(cm, improved, spec).value;
      SampleOptions ropt;
      ropt.count = cfg.resample_count;
      ropt.max_len = cfg.max_len;
      ropt.seed = cfg.seed * 7919 + it;
      ropt.stop = stop;
      data.append(resample_from_critical(model, improved, crit, ropt));
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(row);
    result.strategies.push_back(sigma);
    if (cfg.on_iteration) cfg.on_iteration(row, sigma);
    if (last) break;
  }
  result.satisfied = spec.satisfied_by(result.best_value);
  if (cfg.memory_nodes > 1) result.best_fsc = project_fsc(result.best, delta);
  return result;
}

}  // namespace psynth
