#include <catch2/catch_amalgamated.hpp>

#include "planqa/planner.hpp"

#include <sstream>

#include "support.hpp"

using namespace planqa;

namespace {

std::vector<std::string> plan_names(const Plan& plan) {
  std::vector<std::string> names;
  for (const auto& a : plan.steps) names.push_back(a.name());
  return names;
}

}  // namespace

TEST_CASE("bundled tasks reproduce the expected step sequences") {
  SECTION("clean_dishes is four steps") {
    PlanOutcome out = plan(testing::assets().task("clean_dishes").task);
    REQUIRE(out.solved());
    CHECK(plan_names(out.plan) == std::vector<std::string>{"find(plate)", "pickup(plate)",
                                                           "find(sink)", "wash(plate)"});
  }
  SECTION("serve_breakfast is six steps") {
    PlanOutcome out = plan(testing::assets().task("serve_breakfast").task);
    REQUIRE(out.solved());
    CHECK(plan_names(out.plan) ==
          std::vector<std::string>{"find(bread)", "pickup(bread)", "find(plate)",
                                   "place_on(bread, plate)", "find(tv)", "turnon(tv)"});
  }
  SECTION("eat_apple is seven steps") {
    PlanOutcome out = plan(testing::assets().task("eat_apple").task);
    REQUIRE(out.solved());
    CHECK(plan_names(out.plan) ==
          std::vector<std::string>{"find(fridge)", "open(fridge)", "find(apple)",
                                   "pickup(apple)", "find(knife)", "pickup(knife)",
                                   "cutintohalf(apple)"});
  }
}

TEST_CASE("goal already satisfied yields the empty plan") {
  GroundTask task = testing::assets().task("clean_dishes").task;
  PlanOutcome out = replan(task, task.goal);
  REQUIRE(out.solved());
  CHECK(out.plan.steps.empty());
}

TEST_CASE("a goal atom no action adds is unsolvable") {
  GroundTask task;
  task.atoms = {GroundAtom{"p0", {}}, GroundAtom{"p1", {}}};
  task.init = {0};
  task.goal = {1};
  task.actions.push_back(GroundAction{"op0", {}, {0}, {0}, {}});
  PlanOutcome out = plan(task);
  CHECK(out.status == PlanOutcome::Unsolvable);
}

TEST_CASE("validate_plan walks applicability and the goal") {
  const GroundTask& task = testing::assets().task("clean_dishes").task;
  PlanOutcome out = plan(task);
  REQUIRE(out.solved());
  CHECK(validate_plan(task, out.plan));

  SECTION("empty plan validates only when the goal holds initially") {
    CHECK_FALSE(validate_plan(task, Plan{}));
    GroundTask done = task;
    done.init = done.goal;
    CHECK(validate_plan(done, Plan{}));
  }
  SECTION("an inapplicable first action fails") {
    Plan bad;
    bad.steps.push_back(*task.find_action("wash(plate)"));
    CHECK_FALSE(validate_plan(task, bad));
  }
  SECTION("dropping a step fails validation") {
    Plan truncated = out.plan;
    truncated.steps.erase(truncated.steps.begin() + 1);
    CHECK_FALSE(validate_plan(task, truncated));
  }
}

TEST_CASE("replan after belief repair re-acquires the plate") {
  const GroundTask& task = testing::assets().task("clean_dishes").task;
  // Belief at the wash step after repair: the plate was dropped, so
  // in_hand(plate) is gone and on(plate, table) restored.
  State belief = task.init;
  belief = state_insert(std::move(belief), task.atom_id("near", {"plate"}));
  belief = state_insert(std::move(belief), task.atom_id("near", {"sink"}));
  PlanOutcome out = replan(task, belief);
  REQUIRE(out.solved());
  REQUIRE_FALSE(out.plan.steps.empty());
  CHECK(out.plan.steps[0].name() == "pickup(plate)");
  CHECK(plan_names(out.plan) == std::vector<std::string>{"pickup(plate)", "wash(plate)"});
}

TEST_CASE("replan rejects atoms outside the universe") {
  const GroundTask& task = testing::assets().task("clean_dishes").task;
  State bogus{static_cast<AtomId>(task.atoms.size() + 5)};
  CHECK_THROWS_AS(replan(task, bogus), std::invalid_argument);
}

TEST_CASE("empty init with no applicable action is unsolvable") {
  GroundTask task;
  task.atoms = {GroundAtom{"p0", {}}, GroundAtom{"p1", {}}};
  task.init = {};
  task.goal = {1};
  task.actions.push_back(GroundAction{"op0", {}, {0}, {1}, {}});
  PlanOutcome out = replan(task, State{});
  CHECK(out.status == PlanOutcome::Unsolvable);
}

TEST_CASE("planning is deterministic") {
  const GroundTask& task = testing::assets().task("eat_apple").task;
  PlanOutcome a = plan(task);
  PlanOutcome b = plan(task);
  REQUIRE(a.solved());
  CHECK(a.plan.str() == b.plan.str());
}

TEST_CASE("node budget reports BudgetExceeded") {
  const GroundTask& task = testing::assets().task("eat_apple").task;
  SearchOptions options;
  options.node_budget = 1;
  PlanOutcome out = plan(task, options);
  CHECK(out.status == PlanOutcome::BudgetExceeded);
}

TEST_CASE("planner agrees with a brute-force oracle on random tasks") {
  SplitMix64 rng(7);
  for (int round = 0; round < 100; ++round) {
    GroundTask task = testing::random_task(rng);
    int expected = testing::brute_force_shortest(task);
    PlanOutcome out = plan(task);
    INFO("round " << round);
    if (expected < 0) {
      CHECK(out.status == PlanOutcome::Unsolvable);
    } else {
      REQUIRE(out.solved());
      CHECK(static_cast<int>(out.plan.steps.size()) == expected);
      CHECK(validate_plan(task, out.plan));
    }
  }
}

TEST_CASE("plan files round-trip and reject unknown actions") {
  const GroundTask& task = testing::assets().task("serve_breakfast").task;
  PlanOutcome out = plan(task);
  REQUIRE(out.solved());

  std::stringstream file(out.plan.str());
  Plan reread = read_plan(file, task);
  CHECK(plan_names(reread) == plan_names(out.plan));

  std::stringstream spaced("find(bread)\n  pickup( bread )\n; comment\n\nfind(plate)\n");
  Plan tolerant = read_plan(spaced, task);
  CHECK(plan_names(tolerant) ==
        std::vector<std::string>{"find(bread)", "pickup(bread)", "find(plate)"});

  std::stringstream bogus("levitate(bread)\n");
  CHECK_THROWS_AS(read_plan(bogus, task), std::runtime_error);
}
