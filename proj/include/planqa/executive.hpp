#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "planqa/ground.hpp"
#include "planqa/planner.hpp"
#include "planqa/rng.hpp"
#include "planqa/vqa.hpp"
#include "planqa/worldsim.hpp"

namespace planqa {

enum class Policy { Tpvqa, EffectVqa, TpOpenLoop, SuccessVqa, PalmEVqa };

inline const char* to_string(Policy policy) {
  switch (policy) {
    case Policy::Tpvqa: return "tpvqa";
    case Policy::EffectVqa: return "effectvqa";
    case Policy::TpOpenLoop: return "tp";
    case Policy::SuccessVqa: return "successvqa";
    case Policy::PalmEVqa: return "palmevqa";
  }
  return "?";
}

inline Policy policy_from(const std::string& name) {
  if (name == "tpvqa") return Policy::Tpvqa;
  if (name == "effectvqa") return Policy::EffectVqa;
  if (name == "tp") return Policy::TpOpenLoop;
  if (name == "successvqa") return Policy::SuccessVqa;
  if (name == "palmevqa") return Policy::PalmEVqa;
  throw std::invalid_argument("unknown policy '" + name +
                              "' (tpvqa|effectvqa|tp|successvqa|palmevqa)");
}

inline const std::vector<Policy>& all_policies() {
  static const std::vector<Policy> policies = {Policy::Tpvqa, Policy::EffectVqa,
                                               Policy::TpOpenLoop, Policy::SuccessVqa,
                                               Policy::PalmEVqa};
  return policies;
}

struct Budgets {
  int max_retries_per_action = 10;
  int max_replans = 10;
  int max_total_steps = 100;

  void validate() const {
    if (max_retries_per_action <= 0 || max_replans <= 0 || max_total_steps <= 0)
      throw std::invalid_argument("budgets must be positive");
  }
};

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

struct VerdictEntry {
  std::string label;            // printable target
  std::optional<AtomId> atom;   // set for predicate-style queries
  Answer answer;
  bool unsatisfied = false;
};

/// Majority rule over a batch of answers: act only when a strict
/// majority is unsatisfied. Ties count as satisfied, and no answers at
/// all is trivially satisfied.
struct Verdict {
  std::vector<VerdictEntry> answers;
  int unsatisfied_count = 0;
  bool satisfied = true;

  static Verdict tally(std::vector<VerdictEntry> entries) {
    Verdict v;
    v.answers = std::move(entries);
    for (const auto& e : v.answers) v.unsatisfied_count += e.unsatisfied ? 1 : 0;
    v.satisfied =
        v.unsatisfied_count <= static_cast<int>(v.answers.size()) / 2;
    return v;
  }
};

/// One PredicatePrecondition query per precondition atom.
inline Verdict check_preconditions(const GroundTask& task, const GroundAction& action,
                                   const Observation& observation,
                                   const TemplateTable& templates, OracleClient& oracle,
                                   SplitMix64& rng) {
  std::vector<VerdictEntry> entries;
  for (AtomId a : action.pre) {
    Question q = render_query(task, a, QueryStyle::PredicatePrecondition, templates);
    Answer ans = oracle.ask(q, observation, rng);
    entries.push_back({q.target_label, a, ans, !ans.yes()});
  }
  return Verdict::tally(std::move(entries));
}

/// PredicateEffect queries: add-effects expect Yes, delete-effects expect
/// No; a delete-effect answered Yes counts as unsatisfied.
inline Verdict check_effects(const GroundTask& task, const GroundAction& action,
                             const Observation& observation, const TemplateTable& templates,
                             OracleClient& oracle, SplitMix64& rng) {
  std::vector<VerdictEntry> entries;
  for (AtomId a : action.add) {
    Question q = render_query(task, a, QueryStyle::PredicateEffect, templates);
    Answer ans = oracle.ask(q, observation, rng);
    entries.push_back({q.target_label, a, ans, !ans.yes()});
  }
  for (AtomId a : action.del) {
    Question q = render_query(task, a, QueryStyle::PredicateEffect, templates);
    Answer ans = oracle.ask(q, observation, rng);
    entries.push_back({q.target_label, a, ans, ans.yes()});
  }
  return Verdict::tally(std::move(entries));
}

// ---------------------------------------------------------------------------
// Belief repair
// ---------------------------------------------------------------------------

/// object name -> its fallback location atom, harvested from the
/// problem's initial state.
using FallbackMap = std::map<std::string, AtomId>;

inline FallbackMap make_fallback_map(const GroundTask& task,
                                     const std::string& location_predicate = "on") {
  FallbackMap map;
  for (AtomId a : task.init) {
    const GroundAtom& atom = task.atom(a);
    if (atom.predicate == location_predicate && !atom.args.empty())
      map.emplace(atom.args[0], a);
  }
  return map;
}

struct RepairConfig {
  /// Retracting one of these implies the object went somewhere, so its
  /// fallback location is asserted.
  std::set<std::string> possession_predicates = {"in_hand"};
};

struct RepairResult {
  State belief;
  std::vector<AtomId> retracted;
  std::vector<AtomId> asserted;
  std::vector<std::string> warnings;
};

/// Applies a precondition verdict to the belief: atoms answered No are
/// retracted (with a fallback location asserted for possession-class
/// atoms), atoms answered Yes are asserted if absent.
inline RepairResult repair_belief(const State& belief, const Verdict& verdict,
                                  const FallbackMap& fallback, const GroundTask& task,
                                  const RepairConfig& config = {}) {
  RepairResult result;
  result.belief = belief;
  for (const auto& entry : verdict.answers) {
    if (!entry.atom.has_value()) continue;
    AtomId id = *entry.atom;
    if (entry.answer.yes()) {
      if (!state_contains(result.belief, id)) {
        result.belief = state_insert(std::move(result.belief), id);
        result.asserted.push_back(id);
      }
      continue;
    }
    if (state_contains(result.belief, id)) {
      result.belief = state_erase(std::move(result.belief), id);
      result.retracted.push_back(id);
    }
    const GroundAtom& atom = task.atom(id);
    if (config.possession_predicates.contains(atom.predicate) && !atom.args.empty()) {
      auto fb = fallback.find(atom.args[0]);
      if (fb == fallback.end()) {
        result.warnings.push_back("no fallback location for '" + atom.args[0] + "'");
      } else if (!state_contains(result.belief, fb->second)) {
        result.belief = state_insert(std::move(result.belief), fb->second);
        result.asserted.push_back(fb->second);
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

struct TraceEvent {
  int step = 0;
  std::string phase;  // plan | precheck | execute | effectcheck | repair
  nlohmann::json payload;

  nlohmann::json to_json() const {
    return {{"step", step}, {"phase", phase}, {"payload", payload}};
  }
};

inline std::string trace_to_ldjson(const std::vector<TraceEvent>& trace) {
  std::string out;
  for (const auto& event : trace) {
    out += event.to_json().dump();
    out += '\n';
  }
  return out;
}

enum class TrialEnd { GoalReached, BudgetExhausted, Unsolvable };

inline const char* to_string(TrialEnd end) {
  switch (end) {
    case TrialEnd::GoalReached: return "goal_reached";
    case TrialEnd::BudgetExhausted: return "budget_exhausted";
    case TrialEnd::Unsolvable: return "unsolvable";
  }
  return "?";
}

struct TrialResult {
  bool completed = false;
  int steps_taken = 0;
  int replans = 0;
  int retries = 0;
  TrialEnd failure_reason = TrialEnd::BudgetExhausted;
  std::vector<TraceEvent> trace;

  nlohmann::json to_json(bool include_trace = false) const {
    nlohmann::json j = {{"completed", completed},
                        {"steps_taken", steps_taken},
                        {"replans", replans},
                        {"retries", retries},
                        {"failure_reason", to_string(failure_reason)}};
    if (include_trace) {
      j["trace"] = nlohmann::json::array();
      for (const auto& e : trace) j["trace"].push_back(e.to_json());
    }
    return j;
  }
};

/// Builds trace events. Lives behind friendship so execution flags and
/// answer truthfulness stay diagnostics, invisible to policy decisions.
class TrialRecorder {
 public:
  explicit TrialRecorder(std::vector<TraceEvent>& sink) : sink_(&sink) {}

  void plan_event(int step, const PlanOutcome& outcome) {
    nlohmann::json payload;
    payload["status"] = outcome.status == PlanOutcome::Solved      ? "solved"
                        : outcome.status == PlanOutcome::Unsolvable ? "unsolvable"
                                                                    : "budget_exceeded";
    payload["length"] = outcome.plan.steps.size();
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& a : outcome.plan.steps) steps.push_back(a.name());
    payload["steps"] = std::move(steps);
    push(step, "plan", std::move(payload));
  }

  void verdict_event(int step, const char* phase, const GroundAction& action,
                     const Verdict& verdict, QueryStyle style) {
    nlohmann::json answers = nlohmann::json::array();
    for (const auto& e : verdict.answers)
      answers.push_back({{"target", e.label},
                         {"answer", e.answer.yes() ? "yes" : "no"},
                         {"truthful", e.answer.truthful_},
                         {"unsatisfied", e.unsatisfied}});
    push(step, phase,
         {{"action", action.name()},
          {"style", to_string(style)},
          {"answers", std::move(answers)},
          {"unsatisfied_count", verdict.unsatisfied_count},
          {"satisfied", verdict.satisfied}});
  }

  void execute_event(int step, const GroundAction& action, const ExecutionOutcome& outcome) {
    push(step, "execute",
         {{"action", action.name()},
          {"succeeded", outcome.succeeded_},
          {"regressed", outcome.regressed_}});
  }

  void repair_event(int step, const RepairResult& repair, const GroundTask& task) {
    nlohmann::json retracted = nlohmann::json::array();
    for (AtomId a : repair.retracted) retracted.push_back(task.atom(a).str());
    nlohmann::json asserted = nlohmann::json::array();
    for (AtomId a : repair.asserted) asserted.push_back(task.atom(a).str());
    push(step, "repair",
         {{"retracted", std::move(retracted)},
          {"asserted", std::move(asserted)},
          {"warnings", repair.warnings}});
  }

  void retraction_event(int step, const GroundAction& action, const GroundTask& task) {
    nlohmann::json retracted = nlohmann::json::array();
    for (AtomId a : action.pre) retracted.push_back(task.atom(a).str());
    push(step, "repair",
         {{"retracted", std::move(retracted)},
          {"asserted", nlohmann::json::array()},
          {"warnings", nlohmann::json::array()}});
  }

 private:
  void push(int step, std::string phase, nlohmann::json payload) {
    sink_->push_back({step, std::move(phase), std::move(payload)});
  }

  std::vector<TraceEvent>* sink_;
};

/// Runs one closed-loop trial. Completion is judged by the world's true
/// goal test, never by belief; everything a policy learns about the
/// world arrives through oracle answers.
inline TrialResult run_trial(Policy policy, const GroundTask& task, WorldConfig world_config,
                             const TemplateTable& templates, OracleClient& oracle,
                             const FallbackMap& fallback, const Budgets& budgets,
                             std::uint64_t seed,
                             const std::optional<ImageManifest>& manifest = std::nullopt) {
  budgets.validate();
  world_config.validate();
  world_config.seed = mix_seed(seed, fnv1a64("world"));
  SplitMix64 oracle_rng(mix_seed(seed, fnv1a64("oracle")));

  World world(task, world_config, manifest);
  TrialResult result;
  TrialRecorder recorder(result.trace);
  State belief = task.init;

  auto finish = [&](bool completed, TrialEnd reason) -> TrialResult& {
    result.completed = completed;
    result.failure_reason = reason;
    return result;
  };

  if (goal_reached(world, task)) return finish(true, TrialEnd::GoalReached);

  Plan plan;
  std::size_t step_index = 0;

  auto adopt = [&](const PlanOutcome& outcome) -> std::optional<TrialEnd> {
    recorder.plan_event(result.steps_taken, outcome);
    if (outcome.status == PlanOutcome::Unsolvable) return TrialEnd::Unsolvable;
    if (outcome.status == PlanOutcome::BudgetExceeded) return TrialEnd::BudgetExhausted;
    plan = outcome.plan;
    step_index = 0;
    return std::nullopt;
  };

  if (auto end = adopt(plan_from(task, belief))) return finish(false, *end);

  auto replan_now = [&]() -> std::optional<TrialEnd> {
    if (++result.replans > budgets.max_replans) return TrialEnd::BudgetExhausted;
    return adopt(plan_from(task, belief));
  };

  while (true) {
    if (step_index >= plan.steps.size()) {
      // Plan exhausted but the true goal is unmet: the belief claims
      // success the world does not grant, and there is nothing further
      // to act on.
      return finish(false, TrialEnd::BudgetExhausted);
    }
    // Copied: a repair inside the action loop replaces `plan`.
    GroundAction action = plan.steps[step_index];
    int retries_this_action = 0;
    bool advanced = false;

    while (!advanced) {
      bool replanned = false;

      // Pre-phase.
      if (policy == Policy::Tpvqa) {
        Verdict verdict = check_preconditions(task, action, world.observe(), templates,
                                              oracle, oracle_rng);
        recorder.verdict_event(result.steps_taken, "precheck", action, verdict,
                               QueryStyle::PredicatePrecondition);
        if (!verdict.satisfied) {
          RepairResult repair = repair_belief(belief, verdict, fallback, task);
          belief = repair.belief;
          recorder.repair_event(result.steps_taken, repair, task);
          if (auto end = replan_now()) return finish(false, *end);
          replanned = true;
        }
      } else if (policy == Policy::PalmEVqa) {
        Question q = render_query(action, QueryStyle::NameAffordance, templates);
        Answer ans = oracle.ask(q, world.observe(), oracle_rng);
        Verdict verdict = Verdict::tally({{q.target_label, std::nullopt, ans, !ans.yes()}});
        recorder.verdict_event(result.steps_taken, "precheck", action, verdict,
                               QueryStyle::NameAffordance);
        if (!verdict.satisfied) {
          // Name granularity cannot say which precondition broke, so all
          // of the action's preconditions are retracted before replanning.
          State repaired;
          std::set_difference(belief.begin(), belief.end(), action.pre.begin(),
                              action.pre.end(), std::back_inserter(repaired));
          belief = std::move(repaired);
          recorder.retraction_event(result.steps_taken, action, task);
          if (auto end = replan_now()) return finish(false, *end);
          replanned = true;
        }
      }
      if (replanned) break;

      // Execute.
      if (result.steps_taken >= budgets.max_total_steps)
        return finish(false, TrialEnd::BudgetExhausted);
      ExecutionOutcome outcome = world.execute(action);
      ++result.steps_taken;
      recorder.execute_event(result.steps_taken, action, outcome);
      if (goal_reached(world, task)) return finish(true, TrialEnd::GoalReached);

      // Post-phase.
      bool effects_ok = true;
      if (policy == Policy::Tpvqa || policy == Policy::EffectVqa) {
        Verdict verdict =
            check_effects(task, action, world.observe(), templates, oracle, oracle_rng);
        recorder.verdict_event(result.steps_taken, "effectcheck", action, verdict,
                               QueryStyle::PredicateEffect);
        effects_ok = verdict.satisfied;
      } else if (policy == Policy::SuccessVqa || policy == Policy::PalmEVqa) {
        Question q = render_query(action, QueryStyle::NameSuccess, templates);
        Answer ans = oracle.ask(q, world.observe(), oracle_rng);
        Verdict verdict = Verdict::tally({{q.target_label, std::nullopt, ans, !ans.yes()}});
        recorder.verdict_event(result.steps_taken, "effectcheck", action, verdict,
                               QueryStyle::NameSuccess);
        effects_ok = verdict.satisfied;
      }

      if (effects_ok) {
        belief = apply(belief, action, ApplyMode::Permissive);
        ++step_index;
        advanced = true;
      } else {
        ++result.retries;
        if (++retries_this_action > budgets.max_retries_per_action)
          return finish(false, TrialEnd::BudgetExhausted);
      }
    }
  }
}

/// Convenience entry point for the common simulated-oracle case.
inline TrialResult run_trial(Policy policy, const GroundTask& task,
                             const WorldConfig& world_config, const TemplateTable& templates,
                             const OracleProfile& profile, const FallbackMap& fallback,
                             const Budgets& budgets, std::uint64_t seed,
                             const std::optional<ImageManifest>& manifest = std::nullopt) {
  SimulatedOracleClient oracle(profile);
  return run_trial(policy, task, world_config, templates, oracle, fallback, budgets, seed,
                   manifest);
}

}  // namespace planqa
