#pragma once

// Shared helpers for the test suites: diagnostic access into otherwise
// opaque simulator types, asset loading, and a random-task generator
// with an implementation-independent BFS oracle.

#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "planqa/assets.hpp"
#include "planqa/executive.hpp"
#include "planqa/ground.hpp"
#include "planqa/rng.hpp"
#include "planqa/vqa.hpp"
#include "planqa/worldsim.hpp"

namespace planqa::testing {

struct WorldProbe {
  static const State& true_state(const World& w) { return w.state_; }
  static const State& snapshot(const Observation& o) { return o.snapshot_; }
  static bool last_succeeded(const Observation& o) { return o.last_succeeded_; }
  static const std::string& image_ref(const Observation& o) { return o.image_ref_; }
  static bool succeeded(const ExecutionOutcome& o) { return o.succeeded_; }
  static bool regressed(const ExecutionOutcome& o) { return o.regressed_; }
  static bool truthful(const Answer& a) { return a.truthful_; }

  static Observation make_observation(State snapshot, std::string last_action,
                                      bool last_succeeded, std::string task_id,
                                      std::string image_ref = "") {
    Observation o;
    o.snapshot_ = std::move(snapshot);
    o.last_action_ = std::move(last_action);
    o.last_succeeded_ = last_succeeded;
    o.task_id_ = std::move(task_id);
    o.image_ref_ = std::move(image_ref);
    return o;
  }
};

inline const AssetLibrary& assets() {
  static AssetLibrary lib = AssetLibrary::load(PLANQA_ASSETS);
  return lib;
}

/// Oracle returning a scripted answer sequence; fails the test when
/// asked more questions than scripted.
class ScriptedOracle final : public OracleClient {
 public:
  explicit ScriptedOracle(std::vector<bool> answers) : answers_(std::move(answers)) {}

  Answer ask(const Question&, const Observation&, SplitMix64&) override {
    if (next_ >= answers_.size()) throw std::logic_error("scripted oracle exhausted");
    return Answer(answers_[next_++], true);
  }

  std::size_t asked() const { return next_; }

 private:
  std::vector<bool> answers_;
  std::size_t next_ = 0;
};

// ---------------------------------------------------------------------------
// Random tasks + brute-force oracle
// ---------------------------------------------------------------------------

inline GroundTask random_task(SplitMix64& rng, int max_atoms = 8, int max_actions = 12) {
  GroundTask task;
  int n_atoms = 2 + static_cast<int>(rng.below(max_atoms - 1));
  for (int i = 0; i < n_atoms; ++i)
    task.atoms.push_back(GroundAtom{"p" + std::to_string(i), {}});
  std::sort(task.atoms.begin(), task.atoms.end());

  auto subset = [&](double p) {
    State s;
    for (int i = 0; i < n_atoms; ++i)
      if (rng.bernoulli(p)) s.push_back(static_cast<AtomId>(i));
    return s;
  };

  task.init = subset(0.4);
  task.goal = subset(0.3);
  int n_actions = 1 + static_cast<int>(rng.below(max_actions));
  for (int i = 0; i < n_actions; ++i) {
    GroundAction a;
    a.schema = "op" + std::to_string(i);
    a.pre = subset(0.3);
    for (int j = 0; j < n_atoms; ++j) {
      if (rng.bernoulli(0.3))
        a.add.push_back(static_cast<AtomId>(j));
      else if (rng.bernoulli(0.3))
        a.del.push_back(static_cast<AtomId>(j));
    }
    task.actions.push_back(std::move(a));
  }
  return task;
}

/// Deliberately naive reachability: std::set states, handwritten
/// transition, no sharing with the planner's search path. Returns the
/// shortest plan length or -1 when unsolvable.
inline int brute_force_shortest(const GroundTask& task) {
  using SetState = std::set<AtomId>;
  SetState init(task.init.begin(), task.init.end());
  SetState goal(task.goal.begin(), task.goal.end());

  auto satisfies = [](const SetState& state, const SetState& need) {
    for (AtomId a : need)
      if (!state.count(a)) return false;
    return true;
  };
  if (satisfies(init, goal)) return 0;

  std::map<SetState, int> dist;
  std::queue<SetState> frontier;
  dist[init] = 0;
  frontier.push(init);
  while (!frontier.empty()) {
    SetState current = frontier.front();
    frontier.pop();
    int d = dist[current];
    for (const auto& action : task.actions) {
      bool ok = true;
      for (AtomId a : action.pre)
        if (!current.count(a)) ok = false;
      if (!ok) continue;
      SetState next = current;
      for (AtomId a : action.del) next.erase(a);
      for (AtomId a : action.add) next.insert(a);
      if (satisfies(next, goal)) return d + 1;
      if (dist.emplace(next, d + 1).second) frontier.push(next);
    }
  }
  return -1;
}

}  // namespace planqa::testing
