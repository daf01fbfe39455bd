#include <doctest.h>

#include <string>

#include "psynth/model_io.hpp"
#include "support.hpp"

using namespace psynth;

namespace {

const char* kTwoState = R"(pomdp two
states 2
actions go
init 0
observe 0 -> 0
observe 1 -> 1
trans 0 go : 0.5 -> 0, 0.5 -> 1
trans 1 go : 1 -> 1
label done : 1
)";

std::size_t count_kind(const std::vector<Diagnostic>& d, Diagnostic::Kind k) {
  std::size_t n = 0;
  for (const auto& x : d) n += x.kind == k;
  return n;
}

}  // namespace

TEST_CASE("corridor fixture parses and validates") {
  const Pomdp m = testing::corridor();
  CHECK(m.num_states() == 4);
  CHECK(m.num_actions() == 2);
  CHECK(m.num_observations == 2);
  CHECK(m.observation[0] == m.observation[1]);
  CHECK(m.observation[2] != m.observation[0]);
  CHECK(validate(m).empty());
  CHECK(m.label_mask("goal")[2]);
  CHECK_THROWS_AS(m.label_mask("nowhere"), ModelError);
}

TEST_CASE("underlying mdp keeps rows bit-identical") {
  const Pomdp m = testing::corridor();
  const Mdp u = underlying_mdp(m);
  CHECK(u == static_cast<const Mdp&>(m));
  const Pomdp f = fully_observable(u);
  CHECK(f.num_observations == f.num_states());
  CHECK(static_cast<const Mdp&>(f) == u);
}

TEST_CASE("serialisation round-trips index-preserving") {
  const Pomdp m = testing::corridor();
  const Pomdp back = parse_model(serialize_model(m));
  CHECK(back == m);
  CHECK(model_hash(back) == model_hash(m));
  CHECK(parse_model(kTwoState).num_states() == 2);
}

TEST_CASE("validate reports one diagnostic per violation") {
  Pomdp m = parse_model(kTwoState);
  CHECK(validate(m).empty());

  SUBCASE("row summing to 1 + 1e-6") {
    m.choices[0][0].successors[0].prob += 1e-6;
    const auto d = validate(m);
    CHECK(d.size() == 1);
    CHECK(count_kind(d, Diagnostic::Kind::Stochasticity) == 1);
    CHECK(d[0].state == 0);
  }
  SUBCASE("within tolerance is fine") {
    m.choices[0][0].successors[0].prob += 1e-10;
    CHECK(validate(m).empty());
  }
  SUBCASE("deadlock") {
    m.choices[1].clear();
    const auto d = validate(m);
    CHECK(d.size() == 1);
    CHECK(count_kind(d, Diagnostic::Kind::Deadlock) == 1);
  }
  SUBCASE("negative probability") {
    m.choices[0][0].successors = {{0, -0.5}, {1, 1.5}};
    CHECK(count_kind(validate(m), Diagnostic::Kind::NegativeProbability) == 2);
  }
  SUBCASE("observation outside alphabet") {
    m.observation[1] = 5;
    CHECK(count_kind(validate(m), Diagnostic::Kind::BadObservation) == 1);
  }
}

TEST_CASE("parse errors carry line and column") {
  auto fails_at = [](const std::string& text, std::size_t line) {
    try {
      parse_model(text);
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(e.column() >= 1);
      return;
    } catch (const ModelError&) {
      FAIL("ModelError without position");
    }
    FAIL("no error");
  };
  fails_at("", 1);
  fails_at("pomdp x\nstates 2\nactions go\ninit 0\ntrans 0 go : 1 -> 7\n", 5);
  fails_at("pomdp x\nstates 2\nactions go\ninit 0\ntrans 0 jump : 1 -> 1\n", 5);
  fails_at("pomdp x\nstates two\n", 2);
  // Semantic errors surface as ModelError.
  CHECK_THROWS_AS(parse_model("pomdp x\nstates 1\nactions go\ninit 0\nobserve 0 -> 0\ntrans 0 go : 0.5 -> 0\n"),
                  ModelError);
}
