#include <catch2/catch_amalgamated.hpp>

#include "planqa/pddl.hpp"

#include "support.hpp"

using namespace planqa;

TEST_CASE("kitchen domain parses with its eight schemas in declaration order") {
  Domain d = parse_domain(read_text_file(std::string(PLANQA_ASSETS) + "/kitchen.pddl"));
  CHECK(d.name == "kitchen");
  REQUIRE(d.schemas.size() == 8);
  std::vector<std::string> names;
  for (const auto& s : d.schemas) names.push_back(s.name);
  CHECK(names == std::vector<std::string>{"place_on", "open", "pickup", "turnon", "wash",
                                          "cutintohalf", "find", "goto"});
  CHECK(d.predicates.size() == 7);
  CHECK(d.constants.size() == 5);
}

TEST_CASE("empty domain") {
  Domain d = parse_domain("(define (domain d) (:predicates) )");
  CHECK(d.name == "d");
  CHECK(d.predicates.empty());
  CHECK(d.schemas.empty());
}

TEST_CASE("truncated input reports unbalanced parentheses at end of input") {
  try {
    parse_domain("(define (domain");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("unbalanced parentheses") != std::string::npos);
    CHECK(e.line() == 1);
    CHECK(e.column() == 16);
  }
}

TEST_CASE("requirement flags beyond :strips and :typing are rejected") {
  CHECK_THROWS_AS(parse_domain("(define (domain d) (:requirements :adl) (:predicates))"),
                  ParseError);
  CHECK_NOTHROW(
      parse_domain("(define (domain d) (:requirements :strips :typing) (:predicates))"));
}

TEST_CASE("undeclared names are rejected") {
  SECTION("predicate in action") {
    CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p))"
                                 " (:action a :parameters () :precondition (and (q))"
                                 " :effect (and (p))))"),
                    ParseError);
  }
  SECTION("type") {
    CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p ?x - ghost)))"),
                    ParseError);
  }
  SECTION("variable not in parameters") {
    CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p ?x))"
                                 " (:action a :parameters () :precondition (and (p ?y))"
                                 " :effect (and)))"),
                    ParseError);
  }
  SECTION("duplicate predicate") {
    CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p) (p)))"), ParseError);
  }
  SECTION("add and delete overlap") {
    CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p ?x))"
                                 " (:action a :parameters (?x) :precondition (and)"
                                 " :effect (and (p ?x) (not (p ?x)))))"),
                    ParseError);
  }
}

TEST_CASE("clean_dishes problem parses and carries the plate on the table") {
  const Domain d = parse_domain(read_text_file(std::string(PLANQA_ASSETS) + "/kitchen.pddl"));
  Problem p =
      parse_problem(read_text_file(std::string(PLANQA_ASSETS) + "/clean_dishes.pddl"), d);
  CHECK(p.name == "clean_dishes");
  CHECK(p.domain_name == "kitchen");
  GroundAtom plate_on_table{"on", {"plate", "table"}};
  CHECK(std::find(p.init.begin(), p.init.end(), plate_on_table) != p.init.end());
}

TEST_CASE("problem corner cases") {
  const Domain d = parse_domain(
      "(define (domain d) (:types t) (:predicates (p ?x - t) (q ?x - t ?y - t)))");
  SECTION("empty goal") {
    Problem p = parse_problem(
        "(define (problem e) (:domain d) (:objects a - t) (:init (p a)) (:goal (and)))", d);
    CHECK(p.goal.empty());
  }
  SECTION("goal atom with wrong arity names the predicate") {
    try {
      parse_problem(
          "(define (problem e) (:domain d) (:objects a - t) (:init) (:goal (and (q a))))", d);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("'q'") != std::string::npos);
    }
  }
  SECTION("undeclared object in init") {
    CHECK_THROWS_AS(
        parse_problem("(define (problem e) (:domain d) (:objects a - t) (:init (p b)))", d),
        ParseError);
  }
  SECTION("duplicate object") {
    CHECK_THROWS_AS(
        parse_problem("(define (problem e) (:domain d) (:objects a a - t) (:init))", d),
        ParseError);
  }
}

TEST_CASE("identifiers are lowercased") {
  Domain d = parse_domain("(define (domain KiTcHen) (:predicates (NEAR ?X)))");
  CHECK(d.name == "kitchen");
  CHECK(d.predicates[0].name == "near");
}

TEST_CASE("parse, pretty-print, parse is a fixed point") {
  const std::string root = PLANQA_ASSETS;
  Domain d = parse_domain(read_text_file(root + "/kitchen.pddl"));
  Domain d2 = parse_domain(to_pddl(d));
  CHECK(d == d2);

  for (const char* problem_file :
       {"/clean_dishes.pddl", "/serve_breakfast.pddl", "/eat_apple.pddl"}) {
    Problem p = parse_problem(read_text_file(root + problem_file), d);
    Problem p2 = parse_problem(to_pddl(p), d2);
    CHECK(p == p2);
  }
}

TEST_CASE("single-literal precondition and effect forms") {
  Domain d = parse_domain(
      "(define (domain d) (:predicates (p ?x) (q ?x))"
      " (:action a :parameters (?x) :precondition (p ?x) :effect (q ?x)))");
  REQUIRE(d.schemas.size() == 1);
  CHECK(d.schemas[0].preconditions.size() == 1);
  CHECK(d.schemas[0].add_effects.size() == 1);
  Domain d2 = parse_domain(to_pddl(d));
  CHECK(d == d2);
}
