#include <doctest.h>

#include "psynth/spec.hpp"
#include "support.hpp"

using namespace psynth;

TEST_CASE("supported templates parse") {
  auto s = parse_spec("Pmax [ !X U A ]");
  CHECK(s.shape == Template::Until);
  CHECK(s.cmp == Comparison::Max);
  CHECK(s.goal == "A");
  CHECK(s.avoid == "X");

  s = parse_spec("P>=0.9 [ F goal ]");
  CHECK(s.shape == Template::Eventually);
  CHECK(s.cmp == Comparison::GreaterEqual);
  CHECK(s.threshold == doctest::Approx(0.9));

  s = parse_spec("Pmax [ F (A & F B) ]");
  CHECK(s.shape == Template::SeqReach);
  CHECK(s.first == "A");
  CHECK(s.second == "B");

  s = parse_spec("Pmax [ GF A & GF B & !F X ]");
  CHECK(s.shape == Template::RecurrenceSafety);
  s = parse_spec("Pmax [ !F X & GF B & GF A ]");
  CHECK(s.shape == Template::RecurrenceSafety);
  CHECK(s.avoid == "X");

  s = parse_spec("Emin [ F goal ]");
  CHECK(s.kind == SpecKind::ExpectedReward);
  CHECK(!s.maximizes());
  CHECK(parse_spec(to_string(s)).goal == "goal");
}

TEST_CASE("unsupported shapes are rejected") {
  for (const char* t : {"", "Pmax", "Pmax [ G A ]", "Pmax [ A U B U C ]", "Qmax [ F a ]", "P<=x [ F a ]",
                        "Emax [ GF A & GF B & !F X ]", "Pmax [ F a"})
    CHECK_THROWS_AS(parse_spec(t), SpecError);
}

TEST_CASE("threshold comparison semantics") {
  CHECK(parse_spec("P<=0.5 [ F a ]").satisfied_by(0.5));
  CHECK(!parse_spec("P<0.5 [ F a ]").satisfied_by(0.5));
  CHECK(parse_spec("P>0.5 [ F a ]").satisfied_by(0.6));
  CHECK(parse_spec("Pmax [ F a ]").satisfied_by(0.0));
}

TEST_CASE("automata are total and deterministic") {
  for (const char* t : {"Pmax [ !X U A ]", "Pmax [ F (A & F B) ]", "Pmax [ GF A & GF B & !F X ]", "Emin [ F a ]"}) {
    const auto aut = build_automaton(parse_spec(t));
    CHECK(aut.step_table.size() == aut.nodes * (std::size_t{1} << aut.props.size()));
    for (auto q : aut.step_table) CHECK(q < aut.nodes);
    CHECK(aut.initial < aut.nodes);
  }
  // Sequencing needs to remember that A was seen.
  const auto seq = build_automaton(parse_spec("Pmax [ F (A & F B) ]"));
  CHECK(seq.nodes >= 2);
}

TEST_CASE("composition with the corridor") {
  const Pomdp m = testing::corridor();
  const auto cm = compose(m, build_automaton(parse_spec("Pmax [ !bad U goal ]")));
  CHECK(cm.model.num_states() == m.num_states() * cm.nodes);
  for (StateId s = 0; s < cm.model.num_states(); ++s) CHECK(cm.origin[s] == s / cm.nodes);
  CHECK(validate(cm.model).empty());
  CHECK_THROWS(compose(m, build_automaton(parse_spec("Pmax [ F missing ]"))));
}
