#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "planqa/ground.hpp"
#include "planqa/rng.hpp"

namespace planqa {

namespace testing {
struct WorldProbe;
}
class SimulatedOracle;
class RemoteOracle;
class TrialRecorder;

/// Atom pattern over a schema's parameters: "?0", "?1", ... refer to the
/// triggering action's bound arguments by position, everything else is a
/// constant. The asset loader translates named variables to positions.
struct AtomPattern {
  std::string predicate;
  std::vector<std::string> args;
};

/// What a failed action may do to previously achieved facts: retract the
/// reverts (a dropped object is no longer in hand) and assert the
/// restores (it lands back on a surface).
struct RegressionCandidate {
  std::vector<AtomPattern> reverts;
  std::vector<AtomPattern> restores;
};

/// schema name -> candidate regressions, one picked uniformly when a
/// failed execution regresses.
using RegressionRules = std::map<std::string, std::vector<RegressionCandidate>>;

struct WorldConfig {
  double p_fail = 0.25;
  double p_regress = 0.25;  // conditional on failure
  RegressionRules regression_rules;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(p_fail >= 0.0 && p_fail <= 1.0))
      throw std::invalid_argument("p_fail must be in [0, 1]");
    if (!(p_regress >= 0.0 && p_regress <= 1.0))
      throw std::invalid_argument("p_regress must be in [0, 1]");
  }
};

/// action name -> image pools; both pools must hold exactly 10 paths.
struct ImagePool {
  std::vector<std::string> success;
  std::vector<std::string> failure;
};
using ImageManifest = std::map<std::string, ImagePool>;

inline void validate_manifest(const ImageManifest& manifest) {
  for (const auto& [action, pool] : manifest) {
    if (pool.success.size() != 10 || pool.failure.size() != 10)
      throw std::invalid_argument("image manifest for '" + action +
                                  "' must hold exactly 10 success and 10 failure paths");
  }
}

/// Outcome of one commanded action. Policies receive this only as an
/// opaque token; the flags are read by the trial recorder and by tests.
class ExecutionOutcome {
 public:
  ExecutionOutcome() = default;

 private:
  bool succeeded_ = false;
  bool regressed_ = false;

  friend class World;
  friend class TrialRecorder;
  friend struct testing::WorldProbe;
};

/// Snapshot handed to the oracle. Policy code can see which action was
/// observed but not the state; oracle answers are the only information
/// channel back to a policy.
class Observation {
 public:
  const std::string& last_action() const { return last_action_; }
  const std::string& task_id() const { return task_id_; }

 private:
  State snapshot_;
  std::string last_action_;
  bool last_succeeded_ = false;
  std::string image_ref_;
  std::string task_id_;

  friend class World;
  friend class SimulatedOracle;
  friend class RemoteOracle;
  friend struct testing::WorldProbe;
};

/// The ground-truth environment. One World per trial; the RNG substream
/// is owned, so identical (task, config, command sequence) always yields
/// the identical trajectory.
class World {
 public:
  World(const GroundTask& task, WorldConfig config,
        std::optional<ImageManifest> manifest = std::nullopt)
      : task_(&task),
        config_(std::move(config)),
        manifest_(std::move(manifest)),
        rng_(config_.seed),
        state_(task.init) {
    config_.validate();
    if (manifest_) validate_manifest(*manifest_);
    for (std::size_t i = 0; i < task.actions.size(); ++i)
      action_index_.emplace(task.actions[i].name(), i);
    resolve_regressions();
  }

  ExecutionOutcome execute(const GroundAction& action) {
    auto it = action_index_.find(action.name());
    if (it == action_index_.end())
      throw std::invalid_argument("unknown action '" + action.name() + "'");
    const GroundAction& known = task_->actions[it->second];

    ExecutionOutcome outcome;
    bool pre_ok = state_includes(state_, known.pre);
    // An action commanded when truly inapplicable fails deterministically;
    // only applicable actions roll for success.
    if (pre_ok && !rng_.bernoulli(config_.p_fail)) {
      state_ = apply(state_, known, ApplyMode::Permissive);
      outcome.succeeded_ = true;
    } else if (rng_.bernoulli(config_.p_regress)) {
      const auto& candidates = regressions_[it->second];
      if (!candidates.empty()) {
        const auto& picked = candidates[rng_.below(candidates.size())];
        for (AtomId a : picked.reverts) state_ = state_erase(std::move(state_), a);
        for (AtomId a : picked.restores) state_ = state_insert(std::move(state_), a);
        outcome.regressed_ = true;
      }
    }

    last_action_ = known.name();
    last_succeeded_ = outcome.succeeded_;
    if (manifest_) last_image_ = sample_image(last_action_, outcome.succeeded_);
    ++steps_;
    return outcome;
  }

  Observation observe() const {
    Observation obs;
    obs.snapshot_ = state_;
    obs.last_action_ = last_action_;
    obs.last_succeeded_ = last_succeeded_;
    obs.image_ref_ = last_image_;
    obs.task_id_ = task_->id;
    return obs;
  }

  int steps() const { return steps_; }
  const GroundTask& task() const { return *task_; }

  friend bool goal_reached(const World& world, const GroundTask& task) {
    return state_includes(world.state_, task.goal);
  }

 private:
  struct ResolvedCandidate {
    State reverts;
    State restores;
  };

  void resolve_regressions() {
    regressions_.resize(task_->actions.size());
    for (std::size_t i = 0; i < task_->actions.size(); ++i) {
      const GroundAction& action = task_->actions[i];
      auto rules = config_.regression_rules.find(action.schema);
      if (rules == config_.regression_rules.end()) continue;
      for (const auto& candidate : rules->second) {
        ResolvedCandidate resolved;
        for (const auto& pattern : candidate.reverts)
          resolved.reverts.push_back(resolve_atom(pattern, action));
        for (const auto& pattern : candidate.restores)
          resolved.restores.push_back(resolve_atom(pattern, action));
        regressions_[i].push_back(std::move(resolved));
      }
    }
  }

  AtomId resolve_atom(const AtomPattern& pattern, const GroundAction& action) const {
    GroundAtom atom;
    atom.predicate = pattern.predicate;
    for (const auto& arg : pattern.args) {
      if (!arg.empty() && arg[0] == '?') {
        std::size_t pos = std::stoul(arg.substr(1));
        if (pos >= action.binding.size())
          throw std::invalid_argument("regression rule for '" + action.schema +
                                      "' references parameter " + arg + " beyond arity");
        atom.args.push_back(action.binding[pos]);
      } else {
        atom.args.push_back(arg);
      }
    }
    AtomId id = task_->atom_id(atom);
    if (id >= task_->atoms.size())
      throw std::invalid_argument("regression rule for '" + action.schema +
                                  "' names an atom outside the task universe: " + atom.str());
    return id;
  }

  std::string sample_image(const std::string& action, bool succeeded) {
    auto it = manifest_->find(action);
    if (it == manifest_->end())
      throw std::runtime_error("image manifest has no pool for action '" + action + "'");
    const auto& pool = succeeded ? it->second.success : it->second.failure;
    return pool[rng_.below(pool.size())];
  }

  const GroundTask* task_;
  WorldConfig config_;
  std::optional<ImageManifest> manifest_;
  SplitMix64 rng_;
  State state_;
  std::unordered_map<std::string, std::size_t> action_index_;
  std::vector<std::vector<ResolvedCandidate>> regressions_;
  std::string last_action_;
  bool last_succeeded_ = false;
  std::string last_image_;
  int steps_ = 0;

  friend struct testing::WorldProbe;
};

}  // namespace planqa
