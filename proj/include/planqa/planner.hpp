#pragma once

#include <cstdint>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "planqa/ground.hpp"
#include "planqa/rng.hpp"

namespace planqa {

struct Plan {
  std::vector<GroundAction> steps;

  std::string str() const {
    std::string out;
    for (const auto& a : steps) {
      out += a.name();
      out += '\n';
    }
    return out;
  }

  friend bool operator==(const Plan&, const Plan&) = default;
};

struct PlanOutcome {
  enum Status { Solved, Unsolvable, BudgetExceeded } status = Unsolvable;
  Plan plan;                      // valid when Solved
  std::uint64_t expansions = 0;

  bool solved() const { return status == Solved; }
};

struct SearchOptions {
  std::uint64_t node_budget = 1'000'000;  // expansions before giving up
};

namespace detail {

struct StateHash {
  std::size_t operator()(const State& s) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (AtomId a : s) {
      h ^= a;
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace detail

/// Breadth-first search with duplicate detection over canonical states.
/// Unit costs make BFS optimal; successors are generated in the task's
/// canonical action order and the first visit to a state wins, so the
/// returned plan is the lexicographically least among the shortest ones
/// and identical across runs and platforms.
inline PlanOutcome plan_from(const GroundTask& task, const State& init,
                             const SearchOptions& options = {}) {
  PlanOutcome out;
  if (state_includes(init, task.goal)) {
    out.status = PlanOutcome::Solved;
    return out;
  }

  struct Node {
    State state;
    std::int64_t parent;
    std::uint32_t action;
  };
  std::vector<Node> nodes;
  std::unordered_map<State, std::uint32_t, detail::StateHash> visited;
  std::deque<std::uint32_t> frontier;

  nodes.push_back({init, -1, 0});
  visited.emplace(init, 0);
  frontier.push_back(0);

  auto extract = [&](std::uint32_t leaf, std::uint32_t last_action) {
    std::vector<std::uint32_t> rev{last_action};
    for (std::int64_t n = leaf; nodes[n].parent >= 0; n = nodes[n].parent)
      rev.push_back(nodes[n].action);
    out.plan.steps.reserve(rev.size());
    for (auto it = rev.rbegin(); it != rev.rend(); ++it)
      out.plan.steps.push_back(task.actions[*it]);
    out.status = PlanOutcome::Solved;
  };

  while (!frontier.empty()) {
    std::uint32_t current = frontier.front();
    frontier.pop_front();
    if (++out.expansions > options.node_budget) {
      out.status = PlanOutcome::BudgetExceeded;
      return out;
    }
    for (std::uint32_t ai = 0; ai < task.actions.size(); ++ai) {
      const GroundAction& action = task.actions[ai];
      if (!applicable(nodes[current].state, action)) continue;
      State next = apply(nodes[current].state, action, ApplyMode::Permissive);
      if (state_includes(next, task.goal)) {
        extract(current, ai);
        return out;
      }
      if (visited.contains(next)) continue;
      std::uint32_t id = static_cast<std::uint32_t>(nodes.size());
      visited.emplace(next, id);
      nodes.push_back({std::move(next), current, ai});
      frontier.push_back(id);
    }
  }
  out.status = PlanOutcome::Unsolvable;
  return out;
}

inline PlanOutcome plan(const GroundTask& task, const SearchOptions& options = {}) {
  return plan_from(task, task.init, options);
}

/// Re-plan from a repaired belief state. Every atom must belong to the
/// task's universe.
inline PlanOutcome replan(const GroundTask& task, const State& new_init,
                          const SearchOptions& options = {}) {
  for (AtomId a : new_init)
    if (a >= task.atoms.size())
      throw std::invalid_argument("replan: atom id outside the task universe");
  return plan_from(task, new_init, options);
}

inline bool validate_plan(const GroundTask& task, const Plan& plan) {
  State state = task.init;
  for (const auto& action : plan.steps) {
    if (!applicable(state, action)) return false;
    state = apply(state, action, ApplyMode::Permissive);
  }
  return state_includes(state, task.goal);
}

// ---------------------------------------------------------------------------
// Plan files: one ground action per line, "name(arg1, arg2)". Exported for
// cross-checking against external planners.
// ---------------------------------------------------------------------------

inline void write_plan(const Plan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plan file '" + path + "'");
  out << plan.str();
}

/// Parses "name(arg1, arg2)" lines and resolves them against the task's
/// ground actions. Blank lines and ';' comment lines are skipped.
inline Plan read_plan(std::istream& in, const GroundTask& task) {
  Plan plan;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    std::string text = line.substr(first, last - first + 1);
    if (text.empty() || text[0] == ';') continue;

    // normalize "name(a,b)" / "name(a, b)" to the canonical rendering
    auto open = text.find('(');
    auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
      throw std::runtime_error("plan line " + std::to_string(lineno) +
                               ": expected name(arg, ...), got '" + text + "'");
    std::string name = text.substr(0, open);
    std::vector<std::string> args;
    std::stringstream argstream(text.substr(open + 1, close - open - 1));
    std::string arg;
    while (std::getline(argstream, arg, ',')) {
      auto a = arg.find_first_not_of(" \t");
      auto b = arg.find_last_not_of(" \t");
      if (a == std::string::npos) continue;
      args.push_back(arg.substr(a, b - a + 1));
    }
    std::string canonical = name;
    canonical += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) canonical += ", ";
      canonical += args[i];
    }
    canonical += ')';

    const GroundAction* action = task.find_action(canonical);
    if (action == nullptr)
      throw std::runtime_error("plan line " + std::to_string(lineno) + ": unknown action '" +
                               canonical + "'");
    plan.steps.push_back(*action);
  }
  return plan;
}

inline Plan read_plan_file(const std::string& path, const GroundTask& task) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read plan file '" + path + "'");
  return read_plan(in, task);
}

}  // namespace planqa
