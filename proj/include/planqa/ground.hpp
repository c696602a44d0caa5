#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "planqa/pddl.hpp"

namespace planqa {

using AtomId = std::uint32_t;

/// A state is the canonically sorted set of true atom ids. Atom ids are
/// assigned in canonical (predicate, args) order, so sorted-by-id equals
/// sorted-by-name and equality is insertion-order independent.
using State = std::vector<AtomId>;

inline bool state_contains(const State& s, AtomId a) {
  return std::binary_search(s.begin(), s.end(), a);
}

inline bool state_includes(const State& s, const State& subset) {
  return std::includes(s.begin(), s.end(), subset.begin(), subset.end());
}

inline State state_insert(State s, AtomId a) {
  auto it = std::lower_bound(s.begin(), s.end(), a);
  if (it == s.end() || *it != a) s.insert(it, a);
  return s;
}

inline State state_erase(State s, AtomId a) {
  auto it = std::lower_bound(s.begin(), s.end(), a);
  if (it != s.end() && *it == a) s.erase(it);
  return s;
}

struct GroundAction {
  std::string schema;
  std::vector<std::string> binding;
  State pre;
  State add;
  State del;

  std::string name() const {
    std::string out = schema;
    out += '(';
    for (std::size_t i = 0; i < binding.size(); ++i) {
      if (i) out += ", ";
      out += binding[i];
    }
    out += ')';
    return out;
  }

  friend bool operator==(const GroundAction&, const GroundAction&) = default;
};

/// Grounded planning problem. `actions` is in canonical order: schemas in
/// declaration order, bindings lexicographic; the planner's tie-break
/// depends on it.
struct GroundTask {
  std::string id;  // task asset id, empty for ad-hoc tasks
  std::vector<GroundAtom> atoms;  // canonically sorted; index == AtomId
  State init;
  State goal;
  std::vector<GroundAction> actions;

  const GroundAtom& atom(AtomId id) const { return atoms[id]; }

  /// Canonical lookup; returns atoms.size() when absent.
  AtomId atom_id(const GroundAtom& a) const {
    auto it = std::lower_bound(atoms.begin(), atoms.end(), a);
    if (it != atoms.end() && *it == a) return static_cast<AtomId>(it - atoms.begin());
    return static_cast<AtomId>(atoms.size());
  }

  AtomId atom_id(const std::string& predicate, std::vector<std::string> args) const {
    return atom_id(GroundAtom{predicate, std::move(args)});
  }

  std::string state_str(const State& s) const {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out += ", ";
      out += atoms[s[i]].str();
    }
    out += "}";
    return out;
  }

  const GroundAction* find_action(const std::string& name) const {
    for (const auto& a : actions)
      if (a.name() == name) return &a;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Grounding
// ---------------------------------------------------------------------------

namespace detail {

inline GroundAtom instantiate(const Literal& lit,
                              const std::vector<TypedName>& params,
                              const std::vector<std::string>& binding) {
  GroundAtom atom;
  atom.predicate = lit.predicate;
  atom.args.reserve(lit.args.size());
  for (const auto& arg : lit.args) {
    if (!arg.empty() && arg[0] == '?') {
      for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].name == arg) {
          atom.args.push_back(binding[i]);
          break;
        }
      }
    } else {
      atom.args.push_back(arg);
    }
  }
  return atom;
}

}  // namespace detail

/// Instantiates every schema over all type-consistent bindings of the
/// problem's objects plus the domain's constants. The atom universe is
/// everything mentioned by init, goal, or any ground action.
inline GroundTask ground(const Domain& domain, const Problem& problem) {
  if (problem.domain_name != domain.name)
    throw std::invalid_argument("problem '" + problem.name + "' is for domain '" +
                                problem.domain_name + "', not '" + domain.name + "'");

  std::vector<TypedName> universe = domain.constants;
  universe.insert(universe.end(), problem.objects.begin(), problem.objects.end());

  // Candidates per type, sorted by name for canonical binding order.
  std::map<std::string, std::vector<std::string>> by_type;
  for (const auto& obj : universe) {
    by_type[obj.type].push_back(obj.name);
    by_type["object"].push_back(obj.name);
  }
  for (auto& [type, names] : by_type) {
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
  }

  struct ProtoAction {
    std::string schema;
    std::vector<std::string> binding;
    std::vector<GroundAtom> pre, add, del;
  };
  std::vector<ProtoAction> protos;

  for (const auto& schema : domain.schemas) {
    std::vector<const std::vector<std::string>*> slots;
    bool impossible = false;
    for (const auto& param : schema.parameters) {
      auto it = by_type.find(param.type);
      if (it == by_type.end() || it->second.empty()) {
        impossible = true;  // a type with no objects contributes nothing
        break;
      }
      slots.push_back(&it->second);
    }
    if (impossible) continue;

    std::vector<std::string> binding(schema.parameters.size());
    auto emit = [&] {
      ProtoAction proto;
      proto.schema = schema.name;
      proto.binding = binding;
      for (const auto& lit : schema.preconditions)
        proto.pre.push_back(detail::instantiate(lit, schema.parameters, binding));
      for (const auto& lit : schema.add_effects)
        proto.add.push_back(detail::instantiate(lit, schema.parameters, binding));
      for (const auto& lit : schema.delete_effects)
        proto.del.push_back(detail::instantiate(lit, schema.parameters, binding));
      protos.push_back(std::move(proto));
    };
    // Odometer over slots; slot candidates are sorted, so bindings come
    // out in lexicographic order.
    std::vector<std::size_t> idx(slots.size(), 0);
    while (true) {
      for (std::size_t i = 0; i < slots.size(); ++i) binding[i] = (*slots[i])[idx[i]];
      emit();
      std::size_t k = slots.size();
      while (k > 0) {
        --k;
        if (++idx[k] < slots[k]->size()) break;
        idx[k] = 0;
        if (k == 0) goto done;
      }
      if (slots.empty()) break;
    }
  done:;
  }

  // Collect the atom universe and assign ids in canonical order.
  std::vector<GroundAtom> atoms = problem.init;
  atoms.insert(atoms.end(), problem.goal.begin(), problem.goal.end());
  for (const auto& proto : protos) {
    atoms.insert(atoms.end(), proto.pre.begin(), proto.pre.end());
    atoms.insert(atoms.end(), proto.add.begin(), proto.add.end());
    atoms.insert(atoms.end(), proto.del.begin(), proto.del.end());
  }
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());

  GroundTask task;
  task.atoms = std::move(atoms);

  auto to_ids = [&task](const std::vector<GroundAtom>& list) {
    State ids;
    ids.reserve(list.size());
    for (const auto& atom : list) ids.push_back(task.atom_id(atom));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  };

  task.init = to_ids(problem.init);
  task.goal = to_ids(problem.goal);
  for (auto& proto : protos) {
    GroundAction action;
    action.schema = std::move(proto.schema);
    action.binding = std::move(proto.binding);
    action.pre = to_ids(proto.pre);
    action.add = to_ids(proto.add);
    action.del = to_ids(proto.del);
    task.actions.push_back(std::move(action));
  }
  return task;
}

// ---------------------------------------------------------------------------
// State semantics
// ---------------------------------------------------------------------------

inline bool applicable(const State& state, const GroundAction& action) {
  return state_includes(state, action.pre);
}

enum class ApplyMode { Strict, Permissive };

/// (state \ del) ∪ add. Strict mode rejects inapplicable actions; the
/// simulator uses Permissive since reality has no notion of
/// "inapplicable", only of commands that fail.
inline State apply(const State& state, const GroundAction& action,
                   ApplyMode mode = ApplyMode::Strict) {
  if (mode == ApplyMode::Strict && !applicable(state, action))
    throw std::logic_error("apply: preconditions of " + action.name() + " do not hold");
  State minus;
  minus.reserve(state.size());
  std::set_difference(state.begin(), state.end(), action.del.begin(), action.del.end(),
                      std::back_inserter(minus));
  State result;
  result.reserve(minus.size() + action.add.size());
  std::set_union(minus.begin(), minus.end(), action.add.begin(), action.add.end(),
                 std::back_inserter(result));
  return result;
}

}  // namespace planqa
