#include "psynth/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace psynth {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : ModelError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                 what),
      line_(line),
      column_(column) {}

namespace {

// Cursor over one line of input.
class LineLexer {
 public:
  LineLexer(std::string_view line, std::size_t lineno) : line_(line), lineno_(lineno) {}

  void skip_ws() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t' || line_[pos_] == '\r'))
      ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= line_.size();
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(lineno_, pos_ + 1, what);
  }

  std::string_view word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < line_.size()) {
      const char c = line_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == ':' || c == ',' || c == '=' || c == '-' ||
          static_cast<unsigned char>(c) == 0xE2)
        break;
      ++pos_;
    }
    if (start == pos_) fail("expected identifier");
    return line_.substr(start, pos_ - start);
  }

  std::size_t index(std::string_view what) {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ < line_.size() && line_[pos_] == 's') ++pos_;
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(line_.data() + pos_, line_.data() + line_.size(), value);
    if (ec != std::errc()) {
      pos_ = start;
      fail("expected " + std::string(what) + " index");
    }
    pos_ = static_cast<std::size_t>(ptr - line_.data());
    return value;
  }

  double number() {
    skip_ws();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(line_.data() + pos_, line_.data() + line_.size(), value);
    if (ec != std::errc()) fail("expected number");
    pos_ = static_cast<std::size_t>(ptr - line_.data());
    return value;
  }

  bool try_symbol(std::string_view sym) {
    skip_ws();
    if (line_.substr(pos_, sym.size()) == sym) {
      pos_ += sym.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view sym) {
    if (!try_symbol(sym)) fail("expected '" + std::string(sym) + "'");
  }
  void expect_arrow() {
    if (try_symbol("->") || try_symbol("\xE2\x86\x92")) return;
    fail("expected '->'");
  }
  std::size_t column() const { return pos_ + 1; }

 private:
  std::string_view line_;
  std::size_t lineno_;
  std::size_t pos_ = 0;
};

struct PendingRow {
  StateId state;
  ActionId action;
  std::vector<Transition> successors;
  std::size_t line;
};

}  // namespace

Pomdp parse_model(std::string_view text) {
  Pomdp m;
  std::optional<std::size_t> num_states;
  std::optional<std::size_t> declared_obs;
  std::optional<StateId> init;
  std::vector<std::optional<ObsId>> observe;
  std::vector<PendingRow> rows;
  std::map<std::pair<StateId, ActionId>, double> rewards;
  bool have_header = false;

  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    LineLexer lex(line, lineno);
    if (lex.at_end()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string_view kw = lex.word();
    auto need_states = [&] {
      if (!num_states) lex.fail("'states' must be declared before '" + std::string(kw) + "'");
    };
    auto state_ref = [&](std::string_view what) {
      const std::size_t col = lex.column();
      const StateId s = lex.index(what);
      if (s >= *num_states)
        throw ParseError(lineno, col, "dangling state reference " + std::to_string(s));
      return s;
    };
    auto action_ref = [&] {
      const std::size_t col = lex.column();
      const std::string name(lex.word());
      auto it = std::find(m.actions.begin(), m.actions.end(), name);
      if (it == m.actions.end()) throw ParseError(lineno, col, "dangling action reference '" + name + "'");
      return static_cast<ActionId>(it - m.actions.begin());
    };

    if (!have_header) {
      if (kw != "pomdp") lex.fail("expected header 'pomdp <name>'");
      m.name = std::string(lex.word());
      have_header = true;
    } else if (kw == "states") {
      if (num_states) lex.fail("duplicate 'states'");
      num_states = lex.index("state count");
      if (*num_states == 0) lex.fail("model needs at least one state");
      observe.assign(*num_states, std::nullopt);
    } else if (kw == "observations") {
      declared_obs = lex.index("observation count");
    } else if (kw == "actions") {
      if (!m.actions.empty()) lex.fail("duplicate 'actions'");
      while (!lex.at_end()) {
        std::string name(lex.word());
        if (std::find(m.actions.begin(), m.actions.end(), name) != m.actions.end())
          lex.fail("duplicate action '" + name + "'");
        m.actions.push_back(std::move(name));
      }
      if (m.actions.empty()) lex.fail("expected at least one action");
    } else if (kw == "observe") {
      need_states();
      const StateId s = state_ref("state");
      lex.expect_arrow();
      const std::size_t col = lex.column();
      const ObsId z = lex.index("observation");
      if (declared_obs && z >= *declared_obs)
        throw ParseError(lineno, col, "dangling observation reference " + std::to_string(z));
      if (observe[s]) lex.fail("observation of state " + std::to_string(s) + " given twice");
      observe[s] = z;
    } else if (kw == "trans") {
      need_states();
      PendingRow row{state_ref("state"), 0, {}, lineno};
      row.action = action_ref();
      lex.expect(":");
      do {
        const double p = lex.number();
        lex.expect_arrow();
        row.successors.push_back({state_ref("successor"), p});
      } while (lex.try_symbol(","));
      rows.push_back(std::move(row));
    } else if (kw == "reward") {
      need_states();
      const StateId s = state_ref("state");
      const ActionId a = action_ref();
      lex.expect("=");
      rewards[{s, a}] = lex.number();
    } else if (kw == "label") {
      need_states();
      std::string ap(lex.word());
      lex.expect(":");
      auto& states = m.labels[ap];
      while (!lex.at_end()) states.push_back(state_ref("state"));
      std::sort(states.begin(), states.end());
      states.erase(std::unique(states.begin(), states.end()), states.end());
    } else if (kw == "init") {
      // init s   or   init s=p s=p ...
      need_states();
      init = state_ref("state");
      if (lex.try_symbol("=")) {
        m.initial_distribution.push_back({*init, lex.number()});
        while (!lex.at_end()) {
          const StateId s = state_ref("state");
          lex.expect("=");
          m.initial_distribution.push_back({s, lex.number()});
        }
      }
    } else {
      lex.fail("unknown keyword '" + std::string(kw) + "'");
    }
    if (!lex.at_end()) lex.fail("unexpected trailing input");
    if (end == text.size()) break;
  }

  if (!have_header) throw ParseError(1, 1, "empty document");
  if (!num_states) throw ParseError(lineno, 1, "missing 'states'");
  if (m.actions.empty()) throw ParseError(lineno, 1, "missing 'actions'");
  if (!init) throw ParseError(lineno, 1, "missing 'init'");
  m.initial = *init;

  m.choices.assign(*num_states, {});
  for (auto& row : rows) {
    auto& cs = m.choices[row.state];
    auto it = std::lower_bound(cs.begin(), cs.end(), row.action,
                               [](const Choice& c, ActionId a) { return c.action < a; });
    if (it != cs.end() && it->action == row.action)
      throw ParseError(row.line, 1, "duplicate row for state " + std::to_string(row.state) +
                                        " action " + m.actions[row.action]);
    cs.insert(it, Choice{row.action, std::move(row.successors), 0.0});
  }
  for (const auto& [key, r] : rewards) {
    auto* c = const_cast<Choice*>(m.find_choice(key.first, key.second));
    if (!c)
      throw ModelError("reward given for disabled action " + m.actions[key.second] + " in state " +
                       std::to_string(key.first));
    c->reward = r;
  }

  ObsId max_obs = 0;
  m.observation.resize(*num_states);
  for (StateId s = 0; s < *num_states; ++s) {
    if (!observe[s]) throw ModelError("state " + std::to_string(s) + " has no observation");
    m.observation[s] = *observe[s];
    max_obs = std::max(max_obs, *observe[s]);
  }
  m.num_observations = declared_obs ? *declared_obs : max_obs + 1;

  if (auto diags = validate(m); !diags.empty()) throw ModelError(diags.front().message);
  return m;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string serialize_model(const Pomdp& m) {
  std::ostringstream os;
  os << "pomdp " << (m.name.empty() ? "model" : m.name) << "\n";
  os << "states " << m.num_states() << "\n";
  os << "observations " << m.num_observations << "\n";
  os << "actions";
  for (const auto& a : m.actions) os << ' ' << a;
  os << "\n";
  os << "init";
  if (m.initial_distribution.empty()) os << ' ' << m.initial;
  for (const auto& t : m.initial_distribution) os << ' ' << t.target << '=' << fmt_double(t.prob);
  os << "\n";
  for (StateId s = 0; s < m.num_states(); ++s) os << "observe " << s << " -> " << m.observation[s] << "\n";
  for (StateId s = 0; s < m.num_states(); ++s) {
    for (const auto& c : m.choices[s]) {
      os << "trans " << s << ' ' << m.actions[c.action] << " :";
      for (std::size_t i = 0; i < c.successors.size(); ++i)
        os << (i ? ", " : " ") << fmt_double(c.successors[i].prob) << " -> " << c.successors[i].target;
      os << "\n";
    }
  }
  for (StateId s = 0; s < m.num_states(); ++s)
    for (const auto& c : m.choices[s])
      if (c.reward != 0.0) os << "reward " << s << ' ' << m.actions[c.action] << " = " << fmt_double(c.reward) << "\n";
  for (const auto& [ap, states] : m.labels) {
    os << "label " << ap << " :";
    for (StateId s : states) os << ' ' << s;
    os << "\n";
  }
  return os.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

Pomdp load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

void save_model(const Pomdp& m, const std::filesystem::path& path) {
  write_file(path, serialize_model(m));
}

std::string model_hash(const Pomdp& m) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : serialize_model(m)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace psynth
