#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "planqa/ground.hpp"
#include "planqa/rng.hpp"
#include "planqa/worldsim.hpp"

namespace planqa {

enum class QueryStyle { PredicatePrecondition, PredicateEffect, NameAffordance, NameSuccess };

inline const char* to_string(QueryStyle style) {
  switch (style) {
    case QueryStyle::PredicatePrecondition: return "precondition";
    case QueryStyle::PredicateEffect: return "effect";
    case QueryStyle::NameAffordance: return "affordance";
    case QueryStyle::NameSuccess: return "success";
  }
  return "?";
}

inline QueryStyle query_style_from(const std::string& name) {
  if (name == "precondition") return QueryStyle::PredicatePrecondition;
  if (name == "effect") return QueryStyle::PredicateEffect;
  if (name == "affordance") return QueryStyle::NameAffordance;
  if (name == "success") return QueryStyle::NameSuccess;
  throw std::invalid_argument("unknown query style '" + name +
                              "' (precondition|effect|affordance|success)");
}

inline bool is_predicate_style(QueryStyle style) {
  return style == QueryStyle::PredicatePrecondition || style == QueryStyle::PredicateEffect;
}

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuestionTemplate {
  std::string key;  // predicate name for predicate styles, schema name otherwise
  QueryStyle style;
  std::string pattern;  // "{0}", "{1}" argument slots
};

/// Immutable after load; rendering is pure.
class TemplateTable {
 public:
  void add(QuestionTemplate entry) {
    patterns_[{entry.key, entry.style}] = std::move(entry.pattern);
  }

  const std::string* find(const std::string& key, QueryStyle style) const {
    auto it = patterns_.find({key, style});
    return it == patterns_.end() ? nullptr : &it->second;
  }

  std::string render(const std::string& key, QueryStyle style,
                     const std::vector<std::string>& args) const {
    const std::string* pattern = find(key, style);
    if (pattern == nullptr)
      throw TemplateError("no template for '" + key + "' under style " +
                          to_string(style));
    return substitute(*pattern, args, key, style);
  }

  std::size_t size() const { return patterns_.size(); }

 private:
  static std::string substitute(const std::string& pattern,
                                const std::vector<std::string>& args,
                                const std::string& key, QueryStyle style) {
    std::string out;
    std::set<std::size_t> used;
    for (std::size_t i = 0; i < pattern.size();) {
      if (pattern[i] == '{') {
        auto close = pattern.find('}', i);
        if (close == std::string::npos)
          throw TemplateError("unterminated slot in template for '" + key + "'");
        std::size_t slot = std::stoul(pattern.substr(i + 1, close - i - 1));
        if (slot >= args.size())
          throw TemplateError("template for '" + key + "' uses slot {" +
                              std::to_string(slot) + "} but the target has " +
                              std::to_string(args.size()) + " arguments");
        used.insert(slot);
        out += args[slot];
        i = close + 1;
      } else {
        out += pattern[i++];
      }
    }
    if (used.size() != args.size())
      throw TemplateError("template for '" + key + "' under style " + to_string(style) +
                          " covers " + std::to_string(used.size()) + " of " +
                          std::to_string(args.size()) + " arguments");
    return out;
  }

  std::map<std::pair<std::string, QueryStyle>, std::string> patterns_;
};

/// A rendered yes/no question. Predicate-style questions target one atom;
/// name-style questions target a ground action (copied in, the question
/// outlives any plan it came from).
struct Question {
  std::string text;
  QueryStyle style;
  std::optional<AtomId> atom;          // predicate styles
  std::optional<GroundAction> action;  // name styles
  std::string target_label;            // printable form for verdicts and traces
};

inline Question render_query(const GroundTask& task, AtomId atom, QueryStyle style,
                             const TemplateTable& templates) {
  if (!is_predicate_style(style))
    throw TemplateError("atom targets take predicate styles only");
  const GroundAtom& a = task.atom(atom);
  Question q;
  q.text = templates.render(a.predicate, style, a.args);
  q.style = style;
  q.atom = atom;
  q.target_label = a.str();
  return q;
}

inline Question render_query(const GroundAction& action, QueryStyle style,
                             const TemplateTable& templates) {
  if (is_predicate_style(style))
    throw TemplateError("action targets take name styles only");
  Question q;
  q.text = templates.render(action.schema, style, action.binding);
  q.style = style;
  q.action = action;
  q.target_label = action.name();
  return q;
}

/// Checks that every atom in any action's preconditions or effects, and
/// every schema, can be rendered. Run once at startup so a missing
/// template fails loudly instead of mid-trial.
inline void validate_template_coverage(const TemplateTable& templates, const GroundTask& task) {
  for (const auto& action : task.actions) {
    for (AtomId a : action.pre)
      render_query(task, a, QueryStyle::PredicatePrecondition, templates);
    for (AtomId a : action.add) render_query(task, a, QueryStyle::PredicateEffect, templates);
    for (AtomId a : action.del) render_query(task, a, QueryStyle::PredicateEffect, templates);
    render_query(action, QueryStyle::NameAffordance, templates);
    render_query(action, QueryStyle::NameSuccess, templates);
  }
}

/// Per-(task, style) answer accuracies; the "*" task is a wildcard row.
struct OracleProfile {
  std::string name;
  std::map<std::pair<std::string, QueryStyle>, double> accuracy_table;

  double accuracy(const std::string& task, QueryStyle style) const {
    auto it = accuracy_table.find({task, style});
    if (it == accuracy_table.end()) it = accuracy_table.find({"*", style});
    if (it == accuracy_table.end())
      throw std::out_of_range("oracle profile '" + name + "' has no accuracy for (" + task +
                              ", " + to_string(style) + ")");
    return it->second;
  }

  void validate() const {
    for (const auto& [key, p] : accuracy_table)
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("oracle profile '" + name + "' accuracy for (" + key.first +
                                    ", " + to_string(key.second) + ") is outside [0, 1]");
  }

  static OracleProfile perfect() {
    OracleProfile p;
    p.name = "perfect";
    for (QueryStyle s : {QueryStyle::PredicatePrecondition, QueryStyle::PredicateEffect,
                         QueryStyle::NameAffordance, QueryStyle::NameSuccess})
      p.accuracy_table[{"*", s}] = 1.0;
    return p;
  }
};

/// Yes/no verdict plus a diagnostic flag recording whether the oracle
/// told the truth. The flag never reaches policy decision logic.
class Answer {
 public:
  Answer() = default;
  Answer(bool yes, bool truthful) : yes_(yes), truthful_(truthful) {}

  bool yes() const { return yes_; }

 private:
  bool yes_ = false;
  bool truthful_ = true;

  friend class TrialRecorder;
  friend struct testing::WorldProbe;
};

/// Simulated noisy oracle: answers truthfully with the profile's
/// accuracy for (task, style), otherwise flips. One independent
/// Bernoulli per query.
class SimulatedOracle {
 public:
  static Answer answer(const Question& question, const Observation& observation,
                       const OracleProfile& profile, SplitMix64& rng) {
    bool truth = ground_truth(question, observation);
    bool truthful = rng.bernoulli(profile.accuracy(observation.task_id_, question.style));
    return Answer(truthful ? truth : !truth, truthful);
  }

 private:
  static bool ground_truth(const Question& question, const Observation& observation) {
    switch (question.style) {
      case QueryStyle::PredicatePrecondition:
      case QueryStyle::PredicateEffect:
        return state_contains(observation.snapshot_, question.atom.value());
      case QueryStyle::NameAffordance:
        // "Is it possible to <action> here?" is grounded as: do the
        // action's true preconditions hold right now.
        return state_includes(observation.snapshot_, question.action.value().pre);
      case QueryStyle::NameSuccess:
        return observation.last_succeeded_;
    }
    return false;
  }
};

inline Answer oracle_answer(const Question& question, const Observation& observation,
                            const OracleProfile& profile, SplitMix64& rng) {
  return SimulatedOracle::answer(question, observation, profile, rng);
}

/// Interface the executive talks to; simulated and remote oracles both
/// implement it.
class OracleClient {
 public:
  virtual ~OracleClient() = default;
  virtual Answer ask(const Question& question, const Observation& observation,
                     SplitMix64& rng) = 0;
};

class SimulatedOracleClient final : public OracleClient {
 public:
  explicit SimulatedOracleClient(OracleProfile profile) : profile_(std::move(profile)) {
    profile_.validate();
  }

  Answer ask(const Question& question, const Observation& observation,
             SplitMix64& rng) override {
    return SimulatedOracle::answer(question, observation, profile_, rng);
  }

  const OracleProfile& profile() const { return profile_; }

 private:
  OracleProfile profile_;
};

}  // namespace planqa
