#include <catch2/catch_amalgamated.hpp>

#include "planqa/ground.hpp"

#include <map>
#include <set>

#include "support.hpp"

using namespace planqa;

namespace {

const TaskBundle& clean_dishes() { return testing::assets().task("clean_dishes"); }

// Independent binding enumeration: every |objects-of-type| product per
// schema, counted without the grounder's machinery.
std::set<std::string> brute_force_action_names(const Domain& d, const Problem& p) {
  std::map<std::string, std::vector<std::string>> pool;
  auto add_object = [&](const TypedName& o) {
    pool[o.type].push_back(o.name);
    pool["object"].push_back(o.name);
  };
  for (const auto& c : d.constants) add_object(c);
  for (const auto& o : p.objects) add_object(o);

  std::set<std::string> names;
  for (const auto& schema : d.schemas) {
    std::vector<std::vector<std::string>> bindings{{}};
    for (const auto& param : schema.parameters) {
      std::vector<std::vector<std::string>> extended;
      for (const auto& partial : bindings)
        for (const auto& obj : pool[param.type]) {
          auto next = partial;
          next.push_back(obj);
          extended.push_back(std::move(next));
        }
      bindings = std::move(extended);
    }
    for (const auto& binding : bindings) {
      std::string name = schema.name + "(";
      for (std::size_t i = 0; i < binding.size(); ++i) {
        if (i) name += ", ";
        name += binding[i];
      }
      name += ")";
      names.insert(std::move(name));
    }
  }
  return names;
}

}  // namespace

TEST_CASE("grounding is exhaustive over type-consistent bindings") {
  const Domain d = testing::assets().domain();
  for (const auto& id : {"clean_dishes", "serve_breakfast", "eat_apple"}) {
    const TaskBundle& bundle = testing::assets().task(id);
    std::set<std::string> expected = brute_force_action_names(d, bundle.problem);
    std::set<std::string> actual;
    for (const auto& a : bundle.task.actions) actual.insert(a.name());
    INFO(id);
    CHECK(actual == expected);
    CHECK(bundle.task.actions.size() == expected.size());
  }
}

TEST_CASE("zero objects leave only zero-parameter schemas") {
  Domain d = parse_domain(
      "(define (domain d) (:types t) (:predicates (p) (q ?x - t))"
      " (:action zero :parameters () :precondition (and) :effect (and (p)))"
      " (:action one :parameters (?x - t) :precondition (and) :effect (and (q ?x))))");
  Problem p = parse_problem("(define (problem e) (:domain d) (:objects) (:init))", d);
  GroundTask task = ground(d, p);
  REQUIRE(task.actions.size() == 1);
  CHECK(task.actions[0].name() == "zero()");
}

TEST_CASE("a parameter type with no objects contributes zero ground actions") {
  Domain d = parse_domain(
      "(define (domain d) (:types t u) (:predicates (p ?x - t) (q ?x - u))"
      " (:action a :parameters (?x - t) :precondition (and) :effect (and (p ?x)))"
      " (:action b :parameters (?x - u) :precondition (and) :effect (and (q ?x))))");
  Problem p = parse_problem("(define (problem e) (:domain d) (:objects o1 - t) (:init))", d);
  GroundTask task = ground(d, p);
  REQUIRE(task.actions.size() == 1);
  CHECK(task.actions[0].name() == "a(o1)");
}

TEST_CASE("domain and problem names must match") {
  Domain d = parse_domain("(define (domain d) (:predicates (p)))");
  Problem p = parse_problem("(define (problem e) (:domain other) (:init))", d);
  CHECK_THROWS_AS(ground(d, p), std::invalid_argument);
}

TEST_CASE("applicable checks precondition containment") {
  const GroundTask& task = clean_dishes().task;
  const GroundAction* pickup = task.find_action("pickup(plate)");
  REQUIRE(pickup != nullptr);

  AtomId near_plate = task.atom_id("near", {"plate"});
  AtomId on_plate_table = task.atom_id("on", {"plate", "table"});
  AtomId in_hand_plate = task.atom_id("in_hand", {"plate"});
  REQUIRE(near_plate < task.atoms.size());

  State both{near_plate, on_plate_table};
  std::sort(both.begin(), both.end());
  CHECK(applicable(both, *pickup));
  CHECK_FALSE(applicable(State{on_plate_table}, *pickup));

  const GroundAction* wash = task.find_action("wash(plate)");
  REQUIRE(wash != nullptr);
  CHECK_FALSE(applicable(State{on_plate_table}, *wash));
  CHECK(wash->pre == State{std::min(in_hand_plate, task.atom_id("near", {"sink"})),
                           std::max(in_hand_plate, task.atom_id("near", {"sink"}))});

  GroundAction no_pre{"noop", {}, {}, {}, {}};
  CHECK(applicable(State{}, no_pre));
  CHECK(applicable(both, no_pre));
}

TEST_CASE("apply is exactly (state minus deletes) union adds") {
  const GroundTask& task = clean_dishes().task;
  const GroundAction* pickup = task.find_action("pickup(plate)");
  REQUIRE(pickup != nullptr);

  AtomId near_plate = task.atom_id("near", {"plate"});
  AtomId on_plate_table = task.atom_id("on", {"plate", "table"});
  AtomId in_hand_plate = task.atom_id("in_hand", {"plate"});

  State before{near_plate, on_plate_table};
  std::sort(before.begin(), before.end());
  State after = apply(before, *pickup);
  State expected{near_plate, in_hand_plate};
  std::sort(expected.begin(), expected.end());
  CHECK(after == expected);
  // value semantics: input untouched
  CHECK(before.size() == 2);
  CHECK(state_contains(before, on_plate_table));

  SECTION("empty add and delete is the identity") {
    GroundAction noop{"noop", {}, {}, {}, {}};
    CHECK(apply(before, noop) == before);
  }
  SECTION("adding an atom already present keeps set semantics") {
    GroundAction re_add{"re_add", {}, {}, State{near_plate}, {}};
    CHECK(apply(before, re_add) == before);
  }
  SECTION("strict mode rejects inapplicable actions, permissive does not") {
    State empty;
    CHECK_THROWS_AS(apply(empty, *pickup, ApplyMode::Strict), std::logic_error);
    State after_anyway = apply(empty, *pickup, ApplyMode::Permissive);
    CHECK(state_contains(after_anyway, in_hand_plate));
  }
}

TEST_CASE("atom universe is canonical and covers init, goal, and actions") {
  const GroundTask& task = clean_dishes().task;
  for (std::size_t i = 1; i < task.atoms.size(); ++i) CHECK(task.atoms[i - 1] < task.atoms[i]);
  for (AtomId a : task.init) CHECK(a < task.atoms.size());
  for (AtomId a : task.goal) CHECK(a < task.atoms.size());
  for (const auto& action : task.actions) {
    for (AtomId a : action.pre) CHECK(a < task.atoms.size());
    for (AtomId a : action.add) CHECK(a < task.atoms.size());
    for (AtomId a : action.del) CHECK(a < task.atoms.size());
  }
}

TEST_CASE("apply size bound holds over random states and actions") {
  SplitMix64 rng(2024);
  for (int round = 0; round < 200; ++round) {
    GroundTask task = testing::random_task(rng);
    State s = task.init;
    for (const auto& a : task.actions) {
      State next = apply(s, a, ApplyMode::Permissive);
      CHECK(next.size() <= s.size() + a.add.size());
      for (std::size_t i = 1; i < next.size(); ++i) CHECK(next[i - 1] < next[i]);
      s = std::move(next);
    }
  }
}
