#include "psynth/dataset.hpp"

#include "psynth/model_io.hpp"

#include <random>
#include <sstream>

namespace psynth {

std::size_t TrajectoryDataset::steps() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.actions.size();
  return n;
}

void TrajectoryDataset::append(const TrajectoryDataset& other) {
  if (other.num_observations != num_observations || other.num_actions != num_actions)
    throw ModelError("cannot merge datasets over different alphabets");
  sequences.insert(sequences.end(), other.sequences.begin(), other.sequences.end());
  max_len = std::max(max_len, other.max_len);
}

std::vector<Path> sample_trajectories(const Mdp& m, const MdpStrategy& sigma, const SampleOptions& opt) {
  const std::size_t n = m.num_states();
  if (sigma.num_actions != m.num_actions() || sigma.table.size() != n * m.num_actions())
    throw ModelError("sampling strategy does not match model");
  for (StateId s : opt.starts)
    if (s >= n) throw ModelError("start state " + std::to_string(s) + " out of range");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_start(0, (opt.starts.empty() ? n : opt.starts.size()) - 1);
  std::vector<char> absorbing(n);
  for (StateId s = 0; s < n; ++s) absorbing[s] = m.absorbing(s);

  std::vector<Path> out;
  out.reserve(opt.count);
  for (std::size_t i = 0; i < opt.count; ++i) {
    Path p;
    StateId s = opt.starts.empty() ? pick_start(rng) : opt.starts[pick_start(rng)];
    p.states.push_back(s);
    for (std::size_t step = 0; step < opt.max_len; ++step) {
      if (absorbing[s] || (!opt.stop.empty() && opt.stop[s])) break;
      const auto row = sigma.row(s);
      double u = unit(rng), acc = 0.0;
      ActionId a = row.size();
      ActionId last = row.size();
      for (ActionId b = 0; b < row.size(); ++b) {
        if (row[b] <= 0.0) continue;
        last = b;
        acc += row[b];
        if (u < acc) {
          a = b;
          break;
        }
      }
      if (a == row.size()) a = last;  // rounding at the top end
      if (a == row.size()) throw ModelError("strategy has no action in state " + std::to_string(s));
      const Choice* ch = m.find_choice(s, a);
      if (!ch) throw ModelError("strategy picks disabled action in state " + std::to_string(s));
      u = unit(rng);
      acc = 0.0;
      StateId next = ch->successors.back().target;
      for (const Transition& t : ch->successors) {
        acc += t.prob;
        if (u < acc) {
          next = t.target;
          break;
        }
      }
      p.actions.push_back(a);
      p.states.push_back(next);
      s = next;
    }
    out.push_back(std::move(p));
  }
  return out;
}

TrajectoryDataset to_observation_sequences(const std::vector<Path>& paths, const Pomdp& m) {
  TrajectoryDataset d;
  d.num_observations = m.num_observations;
  d.num_actions = m.num_actions();
  d.model_hash = model_hash(m);
  d.sequences.reserve(paths.size());
  for (const Path& p : paths) {
    Sequence seq;
    seq.obs.reserve(p.states.size());
    for (StateId s : p.states) seq.obs.push_back(m.observation.at(s));
    seq.actions = p.actions;
    d.max_len = std::max(d.max_len, p.actions.size());
    d.sequences.push_back(std::move(seq));
  }
  return d;
}

std::string serialize_dataset(const TrajectoryDataset& d) {
  std::ostringstream os;
  os << "dataset v1 observations=" << d.num_observations << " actions=" << d.num_actions
     << " seed=" << d.seed << " max_len=" << d.max_len
     << " model=" << (d.model_hash.empty() ? "-" : d.model_hash) << "\n";
  for (const auto& s : d.sequences) {
    for (std::size_t i = 0; i < s.obs.size(); ++i) {
      if (i) os << ' ';
      os << s.obs[i];
      if (i < s.actions.size()) os << ' ' << s.actions[i];
    }
    os << "\n";
  }
  return os.str();
}

TrajectoryDataset parse_dataset(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("dataset v1", 0) != 0)
    throw ModelError("expected header 'dataset v1'");
  TrajectoryDataset d;
  std::istringstream head(line.substr(10));
  std::string field;
  while (head >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ModelError("bad dataset header field '" + field + "'");
    const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "observations") d.num_observations = std::stoul(value);
    else if (key == "actions") d.num_actions = std::stoul(value);
    else if (key == "seed") d.seed = std::stoull(value);
    else if (key == "max_len") d.max_len = std::stoul(value);
    else if (key == "model") d.model_hash = value == "-" ? "" : value;
  }
  if (d.num_observations == 0 || d.num_actions == 0) throw ModelError("dataset header lacks alphabet sizes");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::size_t> tokens;
    std::size_t v;
    while (ls >> v) tokens.push_back(v);
    if (!ls.eof()) throw ModelError("line " + std::to_string(lineno) + ": expected integers");
    if (tokens.empty()) continue;
    if (tokens.size() % 2 == 0) throw ModelError("line " + std::to_string(lineno) + ": sequence must end with an observation");
    Sequence s;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i % 2 == 0) {
        if (tokens[i] >= d.num_observations) throw ModelError("line " + std::to_string(lineno) + ": observation out of range");
        s.obs.push_back(tokens[i]);
      } else {
        if (tokens[i] >= d.num_actions) throw ModelError("line " + std::to_string(lineno) + ": action out of range");
        s.actions.push_back(tokens[i]);
      }
    }
    d.sequences.push_back(std::move(s));
  }
  return d;
}

}  // namespace psynth
