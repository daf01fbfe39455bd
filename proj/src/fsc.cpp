#include "psynth/fsc.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "chain_builder.hpp"

namespace psynth {

std::string memory_kind_name(MemoryKind kind) {
  switch (kind) {
    case MemoryKind::ObservationRepeat: return "observation-repeat";
    case MemoryKind::SpecDriven: return "spec-driven";
    case MemoryKind::ExplicitTable: return "explicit-table";
  }
  return "?";
}

MemoryKind parse_memory_kind(std::string_view name) {
  if (name == "observation-repeat" || name == "repeat") return MemoryKind::ObservationRepeat;
  if (name == "spec-driven" || name == "spec") return MemoryKind::SpecDriven;
  if (name == "explicit-table" || name == "table") return MemoryKind::ExplicitTable;
  throw std::invalid_argument("unknown memory update kind '" + std::string(name) + "'");
}

// Labels are comma-separated; the classes are the observations of their states.
SpecDrivenClasses spec_driven_classes(const Pomdp& m, const std::string& set_labels,
                                      const std::string& reset_labels) {
  SpecDrivenClasses c;
  auto collect = [&](const std::string& list, std::vector<ObsId>& out) {
    std::size_t from = 0;
    while (from <= list.size()) {
      const std::size_t to = std::min(list.find(',', from), list.size());
      const std::string ap = list.substr(from, to - from);
      from = to + 1;
      if (ap.empty()) continue;
      if (!m.has_label(ap)) throw ModelError("unknown proposition '" + ap + "'");
      for (StateId s : m.labels.at(ap)) out.push_back(m.observation[s]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  };
  collect(set_labels, c.set);
  collect(reset_labels, c.reset);
  if (c.set.empty()) throw ModelError("spec-driven memory needs at least one set proposition");
  return c;
}

MemoryUpdate memory_update(MemoryKind kind, std::size_t k, const Pomdp& m, const SpecDrivenClasses* classes) {
  if (k == 0) throw std::invalid_argument("memory needs at least one node");
  MemoryUpdate d{kind, k, m.num_observations, m.num_actions(),
                 std::vector<std::size_t>(k * m.num_observations * m.num_actions(), 0)};
  if (k == 1) return d;
  switch (kind) {
    case MemoryKind::ExplicitTable:
      for (std::size_t n = 0; n < k; ++n)
        for (ObsId z = 0; z < d.num_observations; ++z)
          for (ActionId a = 0; a < d.num_actions; ++a) d.at(n, z, a) = n;
      break;
    case MemoryKind::ObservationRepeat: {
      // repeat[z][a]: every state with observation z that enables a moves only
      // to states with observation z (and at least one state enables a).
      std::vector<char> repeat(d.num_observations * d.num_actions, 0), seen(repeat.size(), 0);
      for (StateId s = 0; s < m.num_states(); ++s) {
        const ObsId z = m.observation[s];
        for (const Choice& ch : m.choices[s]) {
          const std::size_t i = z * d.num_actions + ch.action;
          bool stays = true;
          for (const Transition& t : ch.successors)
            if (t.prob > 0 && m.observation[t.target] != z) stays = false;
          repeat[i] = seen[i] ? (repeat[i] && stays) : stays;
          seen[i] = 1;
        }
      }
      for (std::size_t n = 0; n < k; ++n)
        for (ObsId z = 0; z < d.num_observations; ++z)
          for (ActionId a = 0; a < d.num_actions; ++a)
            d.at(n, z, a) = repeat[z * d.num_actions + a] ? std::min(n + 1, k - 1) : n;
      break;
    }
    case MemoryKind::SpecDriven: {
      if (!classes) throw std::invalid_argument("spec-driven memory needs observation classes");
      std::vector<char> set(d.num_observations, 0), reset(d.num_observations, 0);
      for (ObsId z : classes->set) set.at(z) = 1;
      for (ObsId z : classes->reset) reset.at(z) = 1;
      for (std::size_t n = 0; n < k; ++n)
        for (ObsId z = 0; z < d.num_observations; ++z)
          for (ActionId a = 0; a < d.num_actions; ++a)
            d.at(n, z, a) = set[z] ? 1 : reset[z] ? 0 : n;
      break;
    }
  }
  return d;
}

void check_memory_update(const MemoryUpdate& delta) {
  if (delta.nodes == 0) throw ModelError("memory update has no nodes");
  if (delta.table.size() != delta.nodes * delta.num_observations * delta.num_actions)
    throw ModelError("memory update table is not total");
  for (std::size_t v : delta.table)
    if (v >= delta.nodes) throw ModelError("memory update targets node " + std::to_string(v));
}

Pomdp product(const Pomdp& m, const MemoryUpdate& delta) {
  check_memory_update(delta);
  if (delta.num_observations != m.num_observations || delta.num_actions != m.num_actions())
    throw ModelError("memory update alphabet does not match model");
  const std::size_t k = delta.nodes;
  Pomdp p;
  p.name = m.name;
  p.actions = m.actions;
  p.num_observations = m.num_observations * k;
  p.choices.resize(m.num_states() * k);
  p.observation.resize(m.num_states() * k);
  for (StateId s = 0; s < m.num_states(); ++s) {
    const ObsId z = m.observation[s];
    for (std::size_t n = 0; n < k; ++n) {
      const StateId ps = s * k + n;
      p.observation[ps] = z * k + n;
      for (const Choice& ch : m.choices[s]) {
        const std::size_t next = delta(n, z, ch.action);
        Choice lifted{ch.action, {}, ch.reward};
        lifted.successors.reserve(ch.successors.size());
        for (const Transition& t : ch.successors) lifted.successors.push_back({t.target * k + next, t.prob});
        p.choices[ps].push_back(std::move(lifted));
      }
    }
  }
  for (const auto& [ap, states] : m.labels) {
    auto& lifted = p.labels[ap];
    for (StateId s : states)
      for (std::size_t n = 0; n < k; ++n) lifted.push_back(s * k + n);
  }
  p.initial = m.initial * k;
  for (const auto& t : m.initial_distribution) p.initial_distribution.push_back({t.target * k, t.prob});
  return p;
}

Fsc project_fsc(const ObservationStrategy& product_strategy, const MemoryUpdate& delta) {
  check_memory_update(delta);
  const std::size_t k = delta.nodes;
  if (product_strategy.num_observations != delta.num_observations * k ||
      product_strategy.num_actions != delta.num_actions)
    throw ModelError("product strategy does not cover every (observation, node) pair");
  Fsc f;
  f.k = k;
  f.gamma = product_strategy;
  f.gamma.memory_nodes = k;
  f.delta = delta;
  return f;
}

ObservationStrategy flatten(const Fsc& f) {
  ObservationStrategy s = f.gamma;
  s.memory_nodes = f.k;
  return s;
}

Dtmc induced_dtmc(const Pomdp& m, const Fsc& f) {
  const std::size_t k = f.k;
  if (f.delta.num_observations != m.num_observations || f.gamma.num_observations != m.num_observations * k)
    throw ModelError("controller alphabet does not match model");
  detail::ChainBuilder b;
  for (StateId s = 0; s < m.num_states(); ++s) {
    const ObsId z = m.observation[s];
    for (std::size_t n = 0; n < k; ++n) {
      const auto dist = f.action_dist(n, z);
      for (ActionId a = 0; a < dist.size(); ++a) {
        const double w = dist[a];
        if (w == 0.0) continue;
        const Choice* ch = m.find_choice(s, a);
        if (!ch)
          throw ModelError("controller puts mass on disabled action '" + m.actions[a] + "' in state " +
                           std::to_string(s));
        const std::size_t next = f.delta(n, z, a);
        for (const Transition& t : ch->successors) b.add(t.target * k + next, w * t.prob);
        b.add_reward(w * ch->reward);
      }
      b.finish_row(s, n);
    }
  }
  std::vector<Transition> dist;
  for (const auto& t : m.initial_states()) dist.push_back({t.target * k + f.initial, t.prob});
  return b.finish(m.initial * k + f.initial, std::move(dist));
}

VerificationResult check_fsc(const ComposedModel& cm, const Fsc& f, const Specification& spec) {
  const auto start = std::chrono::steady_clock::now();
  const Dtmc d = induced_dtmc(cm.model, f);
  VerificationResult r;
  r.values = objective_values(d, cm.objective);
  r.value = d.initial_value(r.values);
  r.satisfied = spec.satisfied_by(r.value);
  r.states = d.num_states();
  r.transitions = d.num_transitions();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

VerificationResult check_fsc(const Pomdp& m, const Fsc& f, const Specification& spec) {
  return check_fsc(compose(m, build_automaton(spec)), f, spec);
}

std::string serialize_fsc(const Fsc& f, const std::vector<std::string>& actions) {
  std::ostringstream os;
  char buf[64];
  os << "fsc k=" << f.k << " init=" << f.initial << "\n";
  const std::size_t zc = f.delta.num_observations;
  for (std::size_t n = 0; n < f.k; ++n)
    for (ObsId z = 0; z < zc; ++z) {
      os << "gamma " << n << ' ' << z << " :";
      const auto dist = f.action_dist(n, z);
      for (ActionId a = 0; a < dist.size(); ++a) {
        if (dist[a] == 0.0) continue;
        std::snprintf(buf, sizeof buf, "%.17g", dist[a]);
        os << ' ' << actions.at(a) << '=' << buf;
      }
      os << "\n";
    }
  for (std::size_t n = 0; n < f.k; ++n)
    for (ObsId z = 0; z < zc; ++z)
      for (ActionId a = 0; a < f.delta.num_actions; ++a)
        os << "delta " << n << ' ' << z << ' ' << actions.at(a) << " -> " << f.delta(n, z, a) << "\n";
  return os.str();
}

Fsc parse_fsc(std::string_view text, const std::vector<std::string>& actions, std::size_t num_observations) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) -> void {
    throw ModelError("line " + std::to_string(lineno) + ": " + what);
  };
  auto action_id = [&](const std::string& name) {
    auto it = std::find(actions.begin(), actions.end(), name);
    if (it == actions.end()) fail("unknown action '" + name + "'");
    return static_cast<ActionId>(it - actions.begin());
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  std::size_t k = 0, init = 0;
  if (std::sscanf(line.c_str(), "fsc k=%zu init=%zu", &k, &init) != 2 || k == 0)
    fail("expected header 'fsc k=<k> init=<n>'");
  if (init >= k) fail("initial node out of range");
  Fsc f;
  f.k = k;
  f.initial = init;
  f.gamma = ObservationStrategy(num_observations * k, actions.size(), k);
  f.delta = MemoryUpdate{MemoryKind::ExplicitTable, k, num_observations, actions.size(),
                         std::vector<std::size_t>(k * num_observations * actions.size(), k)};
  std::vector<char> gamma_seen(num_observations * k, 0);
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    std::size_t n = 0, z = 0;
    if (!(ls >> n >> z)) fail("expected node and observation");
    if (n >= k || z >= num_observations) fail("node or observation out of range");
    if (kw == "gamma") {
      std::string colon, item;
      if (!(ls >> colon) || colon != ":") fail("expected ':'");
      gamma_seen[z * k + n] = 1;
      while (ls >> item) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) fail("expected action=p");
        double p = 0.0;
        const std::string num = item.substr(eq + 1);
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), p);
        if (ec != std::errc() || ptr != num.data() + num.size()) fail("bad probability '" + num + "'");
        f.gamma.row(z * k + n)[action_id(item.substr(0, eq))] = p;
      }
    } else if (kw == "delta") {
      std::string act, arrow;
      std::size_t next = 0;
      if (!(ls >> act >> arrow >> next) || arrow != "->") fail("expected 'delta n z a -> n2'");
      if (next >= k) fail("target node out of range");
      f.delta.at(n, z, action_id(act)) = next;
    } else {
      fail("unknown keyword '" + kw + "'");
    }
  }
  for (std::size_t i = 0; i < gamma_seen.size(); ++i)
    if (!gamma_seen[i])
      throw ModelError("missing gamma for node " + std::to_string(i % k) + " observation " + std::to_string(i / k));
  for (std::size_t v : f.delta.table)
    if (v >= k) throw ModelError("memory update is not total");
  check_distributions(f.gamma);
  return f;
}

}  // namespace psynth
