#include "psynth/spec.hpp"

#include <cctype>
#include <charconv>
#include <memory>
#include <sstream>

namespace psynth {

bool Specification::satisfied_by(double value) const {
  switch (cmp) {
    case Comparison::Max:
    case Comparison::Min: return true;
    case Comparison::Less: return value < threshold;
    case Comparison::LessEqual: return value <= threshold;
    case Comparison::GreaterEqual: return value >= threshold;
    case Comparison::Greater: return value > threshold;
  }
  return false;
}

std::vector<std::string> Specification::propositions() const {
  switch (shape) {
    case Template::Until: return {avoid, goal};
    case Template::Eventually: return {goal};
    case Template::SeqReach: return {first, second};
    case Template::RecurrenceSafety: return {first, second, avoid};
  }
  return {};
}

namespace {

struct Ltl {
  enum class Op { True, False, Ap, Not, And, Or, Until, Finally, Globally };
  Op op;
  std::string name;
  std::shared_ptr<Ltl> lhs, rhs;
};
using LtlPtr = std::shared_ptr<Ltl>;

LtlPtr node(Ltl::Op op, LtlPtr l = nullptr, LtlPtr r = nullptr) {
  return std::make_shared<Ltl>(Ltl{op, {}, std::move(l), std::move(r)});
}

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : text_(text) {}

  Specification parse() {
    Specification spec;
    spec.text = std::string(text_);
    skip_ws();
    if (eat('P'))
      spec.kind = SpecKind::Probability;
    else if (eat('E') || eat('R'))
      spec.kind = SpecKind::ExpectedReward;
    else
      fail("expected 'P' or 'E'");
    parse_bound(spec);
    expect('[');
    LtlPtr path = parse_or();
    expect(']');
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    classify(spec, path);
    return spec;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw SpecError("spec syntax error at column " + std::to_string(pos_ + 1) + ": " + why);
  }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool eat(std::string_view s) {
    skip_ws();
    if (text_.substr(pos_, s.size()) == s) {
      pos_ += s.size();
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  void parse_bound(Specification& spec) {
    if (eat("max")) {
      spec.cmp = Comparison::Max;
      return;
    }
    if (eat("min")) {
      spec.cmp = Comparison::Min;
      return;
    }
    if (eat("<="))
      spec.cmp = Comparison::LessEqual;
    else if (eat(">="))
      spec.cmp = Comparison::GreaterEqual;
    else if (eat('<'))
      spec.cmp = Comparison::Less;
    else if (eat('>'))
      spec.cmp = Comparison::Greater;
    else
      fail("expected 'max', 'min' or a comparison");
    skip_ws();
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), spec.threshold);
    if (ec != std::errc()) fail("expected threshold");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    if (spec.kind == SpecKind::Probability && !(spec.threshold >= 0.0 && spec.threshold <= 1.0))
      throw SpecError("probability threshold must lie in [0,1]");
    if (spec.kind == SpecKind::ExpectedReward && !(spec.threshold >= 0.0))
      throw SpecError("reward threshold must be non-negative");
  }

  // Identifier or keyword; "GF" and "FG" are split into two operators.
  std::string peek_word() {
    skip_ws();
    std::size_t end = pos_;
    while (end < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
      ++end;
    return std::string(text_.substr(pos_, end - pos_));
  }

  LtlPtr parse_or() {
    LtlPtr l = parse_and();
    while (eat('|')) l = node(Ltl::Op::Or, l, parse_and());
    return l;
  }
  LtlPtr parse_and() {
    LtlPtr l = parse_until();
    while (eat('&')) l = node(Ltl::Op::And, l, parse_until());
    return l;
  }
  LtlPtr parse_until() {
    LtlPtr l = parse_unary();
    if (peek_word() == "U") {
      pos_ += 1;
      return node(Ltl::Op::Until, l, parse_unary());
    }
    return l;
  }
  LtlPtr parse_unary() {
    if (eat('!')) return node(Ltl::Op::Not, parse_unary());
    const std::string w = peek_word();
    if (w == "F" || w == "G") {
      pos_ += 1;
      return node(w == "F" ? Ltl::Op::Finally : Ltl::Op::Globally, parse_unary());
    }
    if (w == "GF" || w == "FG") {
      pos_ += 2;
      auto inner = node(w[1] == 'F' ? Ltl::Op::Finally : Ltl::Op::Globally, parse_unary());
      return node(w[0] == 'G' ? Ltl::Op::Globally : Ltl::Op::Finally, inner);
    }
    return parse_atom();
  }
  LtlPtr parse_atom() {
    if (eat('(')) {
      LtlPtr inner = parse_or();
      expect(')');
      return inner;
    }
    const std::string w = peek_word();
    if (w.empty()) fail("expected proposition");
    if (w == "U") fail("unexpected 'U'");
    pos_ += w.size();
    if (w == "true") return node(Ltl::Op::True);
    if (w == "false") return node(Ltl::Op::False);
    auto ap = node(Ltl::Op::Ap);
    ap->name = w;
    return ap;
  }

  [[noreturn]] void unsupported() const {
    throw SpecError(
        "unsupported LTL formula: expected one of '!x U a', 'true U a', 'F a', 'F (a & F b)', "
        "'GF a & GF b & !F x'");
  }

  static bool is_ap(const LtlPtr& p) { return p && p->op == Ltl::Op::Ap; }

  static void conjuncts(const LtlPtr& p, std::vector<LtlPtr>& out) {
    if (p->op == Ltl::Op::And) {
      conjuncts(p->lhs, out);
      conjuncts(p->rhs, out);
    } else {
      out.push_back(p);
    }
  }

  void classify(Specification& spec, const LtlPtr& path) {
    using Op = Ltl::Op;
    if (path->op == Op::Until && is_ap(path->rhs)) {
      if (path->lhs->op == Op::True) {
        spec.shape = Template::Eventually;
        spec.goal = path->rhs->name;
      } else if (path->lhs->op == Op::Not && is_ap(path->lhs->lhs)) {
        spec.shape = Template::Until;
        spec.avoid = path->lhs->lhs->name;
        spec.goal = path->rhs->name;
      } else {
        unsupported();
      }
    } else if (path->op == Op::Finally && is_ap(path->lhs)) {
      spec.shape = Template::Eventually;
      spec.goal = path->lhs->name;
    } else if (path->op == Op::Finally && path->lhs->op == Op::And && is_ap(path->lhs->lhs) &&
               path->lhs->rhs->op == Op::Finally && is_ap(path->lhs->rhs->lhs)) {
      spec.shape = Template::SeqReach;
      spec.first = path->lhs->lhs->name;
      spec.second = path->lhs->rhs->lhs->name;
    } else if (path->op == Op::And) {
      std::vector<LtlPtr> parts;
      conjuncts(path, parts);
      std::vector<std::string> recur;
      std::vector<std::string> avoid;
      for (const auto& p : parts) {
        if (p->op == Op::Globally && p->lhs->op == Op::Finally && is_ap(p->lhs->lhs))
          recur.push_back(p->lhs->lhs->name);
        else if (p->op == Op::Not && p->lhs->op == Op::Finally && is_ap(p->lhs->lhs))
          avoid.push_back(p->lhs->lhs->name);
        else if (p->op == Op::Globally && p->lhs->op == Op::Not && is_ap(p->lhs->lhs))
          avoid.push_back(p->lhs->lhs->name);
        else
          unsupported();
      }
      if (recur.size() != 2 || avoid.size() != 1) unsupported();
      spec.shape = Template::RecurrenceSafety;
      spec.first = recur[0];
      spec.second = recur[1];
      spec.avoid = avoid[0];
    } else {
      unsupported();
    }
    if (spec.kind == SpecKind::ExpectedReward && spec.shape != Template::Eventually &&
        spec.shape != Template::SeqReach)
      throw SpecError("expected-reward specifications support only 'F a' and 'F (a & F b)'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string bound_text(const Specification& s) {
  std::ostringstream os;
  os.precision(17);
  switch (s.cmp) {
    case Comparison::Max: return "max";
    case Comparison::Min: return "min";
    case Comparison::Less: os << "<"; break;
    case Comparison::LessEqual: os << "<="; break;
    case Comparison::GreaterEqual: os << ">="; break;
    case Comparison::Greater: os << ">"; break;
  }
  os << s.threshold;
  return os.str();
}

}  // namespace

Specification parse_spec(std::string_view text) { return SpecParser(text).parse(); }

std::string to_string(const Specification& s) {
  std::string out = (s.kind == SpecKind::Probability ? "P" : "E") + bound_text(s) + " [ ";
  switch (s.shape) {
    case Template::Until: out += "!" + s.avoid + " U " + s.goal; break;
    case Template::Eventually: out += "F " + s.goal; break;
    case Template::SeqReach: out += "F (" + s.first + " & F " + s.second + ")"; break;
    case Template::RecurrenceSafety:
      out += "GF " + s.first + " & GF " + s.second + " & !F " + s.avoid;
      break;
  }
  return out + " ]";
}

SpecAutomaton build_automaton(const Specification& spec) {
  SpecAutomaton aut;
  aut.spec = spec;
  aut.props = spec.propositions();
  const std::size_t masks = std::size_t{1} << aut.props.size();
  if (spec.shape == Template::SeqReach) {
    // Node 1 records that the first landmark has been seen.
    aut.nodes = 2;
    aut.step_table.resize(2 * masks);
    for (std::size_t mask = 0; mask < masks; ++mask) {
      aut.step_table[mask] = (mask & 1u) ? 1 : 0;
      aut.step_table[masks + mask] = 1;
    }
  } else {
    aut.nodes = 1;
    aut.step_table.assign(masks, 0);
  }
  aut.acceptance = spec.shape == Template::RecurrenceSafety ? SpecAutomaton::Acceptance::Recurrence
                                                            : SpecAutomaton::Acceptance::Reach;
  return aut;
}

ComposedModel compose(const Pomdp& m, const SpecAutomaton& aut) {
  const Specification& spec = aut.spec;
  std::vector<std::vector<char>> masks;
  for (const auto& ap : aut.props) {
    if (!m.has_label(ap))
      throw SpecError("specification refers to proposition '" + ap + "' missing from model");
    masks.push_back(m.label_mask(ap));
  }
  auto label_bits = [&](StateId s) {
    unsigned bits = 0;
    for (std::size_t i = 0; i < masks.size(); ++i)
      if (masks[i][s]) bits |= 1u << i;
    return bits;
  };

  ComposedModel out;
  const std::size_t k = aut.nodes;
  const std::size_t n = m.num_states();
  out.nodes = k;
  if (k == 1) {
    out.model = m;
    out.origin.resize(n);
    out.node.assign(n, 0);
    for (StateId s = 0; s < n; ++s) out.origin[s] = s;
  } else {
    Pomdp& p = out.model;
    p.name = m.name;
    p.actions = m.actions;
    p.num_observations = m.num_observations;
    p.choices.resize(n * k);
    p.observation.resize(n * k);
    out.origin.resize(n * k);
    out.node.resize(n * k);
    for (StateId s = 0; s < n; ++s) {
      for (std::size_t q = 0; q < k; ++q) {
        const StateId c = s * k + q;
        out.origin[c] = s;
        out.node[c] = q;
        p.observation[c] = m.observation[s];
        for (const Choice& ch : m.choices[s]) {
          Choice lifted{ch.action, {}, ch.reward};
          lifted.successors.reserve(ch.successors.size());
          for (const Transition& t : ch.successors)
            lifted.successors.push_back({t.target * k + aut.step(q, label_bits(t.target)), t.prob});
          p.choices[c].push_back(std::move(lifted));
        }
      }
    }
    for (const auto& [ap, states] : m.labels) {
      auto& lifted = p.labels[ap];
      for (StateId s : states)
        for (std::size_t q = 0; q < k; ++q) lifted.push_back(s * k + q);
    }
    p.initial = m.initial * k + aut.step(aut.initial, label_bits(m.initial));
    for (const auto& t : m.initial_distribution)
      p.initial_distribution.push_back({t.target * k + aut.step(aut.initial, label_bits(t.target)), t.prob});
  }

  const std::size_t nc = out.model.num_states();
  Objective& obj = out.objective;
  auto holds = [&](std::size_t prop, StateId c) { return masks[prop][out.origin[c]] != 0; };
  switch (spec.shape) {
    case Template::Until:
    case Template::Eventually: {
      const std::size_t goal_prop = spec.shape == Template::Until ? 1 : 0;
      obj.goal.assign(nc, 0);
      obj.avoid.assign(nc, 0);
      for (StateId c = 0; c < nc; ++c) {
        obj.goal[c] = holds(goal_prop, c);
        if (spec.shape == Template::Until) obj.avoid[c] = !obj.goal[c] && holds(0, c);
      }
      break;
    }
    case Template::SeqReach:
      obj.goal.assign(nc, 0);
      obj.avoid.assign(nc, 0);
      for (StateId c = 0; c < nc; ++c) obj.goal[c] = out.node[c] == 1 && holds(1, c);
      break;
    case Template::RecurrenceSafety:
      obj.rec1.assign(nc, 0);
      obj.rec2.assign(nc, 0);
      obj.safe.assign(nc, 0);
      for (StateId c = 0; c < nc; ++c) {
        obj.rec1[c] = holds(0, c);
        obj.rec2[c] = holds(1, c);
        obj.safe[c] = !holds(2, c);
      }
      break;
  }
  obj.kind = spec.shape == Template::RecurrenceSafety ? Objective::Kind::Recurrence
             : spec.kind == SpecKind::ExpectedReward  ? Objective::Kind::Reward
                                                      : Objective::Kind::Reach;
  return out;
}

}  // namespace psynth
