#include "psynth/strategy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace psynth {

ObservationStrategy uniform_strategy(const Pomdp& m) {
  ObservationStrategy s(m.num_observations, m.num_actions());
  for (ObsId z = 0; z < m.num_observations; ++z) {
    const auto acts = m.class_actions(z);
    for (ActionId a : acts) s.row(z)[a] = 1.0 / static_cast<double>(acts.size());
  }
  return s;
}

ObservationStrategy deterministic_strategy(const Pomdp& m, const std::vector<ActionId>& choice) {
  if (choice.size() != m.num_observations)
    throw ModelError("deterministic strategy needs one action per observation");
  ObservationStrategy s(m.num_observations, m.num_actions());
  for (ObsId z = 0; z < m.num_observations; ++z) s.row(z)[choice[z]] = 1.0;
  return s;
}

void check_distributions(const ObservationStrategy& s, double tol) {
  for (ObsId z = 0; z < s.num_observations; ++z) {
    double sum = 0.0;
    for (double p : s.row(z)) {
      if (!(p >= 0.0)) throw ModelError("strategy row " + std::to_string(z) + " has a negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol)
      throw ModelError("strategy row " + std::to_string(z) + " sums to " + std::to_string(sum));
  }
}

MdpStrategy lift(const Pomdp& m, const ObservationStrategy& s) {
  MdpStrategy out{m.num_actions(), std::vector<double>(m.num_states() * m.num_actions(), 0.0)};
  for (StateId st = 0; st < m.num_states(); ++st) {
    const auto r = s.row(m.observation[st]);
    std::copy(r.begin(), r.end(), out.row(st).begin());
  }
  return out;
}

ObservationStrategy to_observation_strategy(const Pomdp& m, const MdpStrategy& s) {
  ObservationStrategy out(m.num_observations, m.num_actions());
  std::vector<StateId> first(m.num_observations, m.num_states());
  for (StateId st = 0; st < m.num_states(); ++st) {
    const ObsId z = m.observation[st];
    if (first[z] == m.num_states()) {
      first[z] = st;
      std::copy(s.row(st).begin(), s.row(st).end(), out.row(z).begin());
      continue;
    }
    if (!std::equal(s.row(st).begin(), s.row(st).end(), out.row(z).begin()))
      throw ModelError("per-state strategy is not observation-based: states " +
                       std::to_string(first[z]) + " and " + std::to_string(st) +
                       " share observation " + std::to_string(z) + " but choose differently");
  }
  for (ObsId z = 0; z < m.num_observations; ++z)
    if (first[z] == m.num_states())
      for (double& p : out.row(z)) p = 1.0 / static_cast<double>(m.num_actions());
  return out;
}

std::string serialize_strategy(const ObservationStrategy& s, const std::vector<std::string>& actions) {
  std::ostringstream os;
  const std::size_t k = s.memory_nodes;
  os << "strategy v1 observations=" << s.num_observations / k << " actions=" << s.num_actions
     << " memory=" << k << "\n";
  char buf[64];
  for (ObsId id = 0; id < s.num_observations; ++id) {
    os << id / k;
    if (k > 1) os << ' ' << id % k;
    os << " :";
    for (ActionId a = 0; a < s.num_actions; ++a) {
      if (s(id, a) == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g", s(id, a));
      os << ' ' << actions.at(a) << '=' << buf;
    }
    os << "\n";
  }
  return os.str();
}

namespace {

std::size_t header_field(const std::string& line, const std::string& key) {
  const auto pos = line.find(key + "=");
  if (pos == std::string::npos) throw ModelError("strategy header lacks '" + key + "'");
  return std::stoul(line.substr(pos + key.size() + 1));
}

}  // namespace

ObservationStrategy parse_strategy(std::string_view text, const std::vector<std::string>& actions) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  if (line.rfind("strategy v1", 0) != 0) throw ModelError("expected header 'strategy v1'");
  const std::size_t z_count = header_field(line, "observations");
  const std::size_t a_count = header_field(line, "actions");
  const std::size_t k = header_field(line, "memory");
  if (a_count != actions.size())
    throw ModelError("strategy has " + std::to_string(a_count) + " actions, model has " +
                     std::to_string(actions.size()));
  if (k == 0) throw ModelError("memory must be >= 1");
  ObservationStrategy s(z_count * k, a_count, k);
  std::vector<char> seen(z_count * k, 0);
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw ModelError("line " + std::to_string(lineno) + ": expected ':'");
    std::istringstream head(line.substr(0, colon));
    std::size_t z = 0, n = 0;
    if (!(head >> z)) throw ModelError("line " + std::to_string(lineno) + ": expected observation");
    if (k > 1 && !(head >> n)) throw ModelError("line " + std::to_string(lineno) + ": expected memory node");
    if (z >= z_count || n >= k) throw ModelError("line " + std::to_string(lineno) + ": index out of range");
    const ObsId id = z * k + n;
    seen[id] = 1;
    std::istringstream body(line.substr(colon + 1));
    std::string item;
    while (body >> item) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ModelError("line " + std::to_string(lineno) + ": expected action=p");
      const std::string name = item.substr(0, eq);
      auto it = std::find(actions.begin(), actions.end(), name);
      if (it == actions.end()) throw ModelError("line " + std::to_string(lineno) + ": unknown action '" + name + "'");
      double p = 0.0;
      const std::string num = item.substr(eq + 1);
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), p);
      if (ec != std::errc() || ptr != num.data() + num.size())
        throw ModelError("line " + std::to_string(lineno) + ": bad probability '" + num + "'");
      s.row(id)[static_cast<std::size_t>(it - actions.begin())] = p;
    }
  }
  for (ObsId id = 0; id < seen.size(); ++id)
    if (!seen[id]) throw ModelError("strategy misses observation " + std::to_string(id / k) +
                                    (k > 1 ? " node " + std::to_string(id % k) : std::string()));
  check_distributions(s);
  return s;
}

}  // namespace psynth
