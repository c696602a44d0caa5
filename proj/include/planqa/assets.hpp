#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "planqa/executive.hpp"
#include "planqa/ground.hpp"
#include "planqa/pddl.hpp"
#include "planqa/vqa.hpp"
#include "planqa/worldsim.hpp"

namespace planqa {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return nlohmann::json::parse(in);
}

inline TemplateTable load_templates(const nlohmann::json& entries) {
  TemplateTable table;
  for (const auto& entry : entries) {
    QuestionTemplate t;
    if (entry.contains("predicate"))
      t.key = entry.at("predicate").get<std::string>();
    else
      t.key = entry.at("schema").get<std::string>();
    t.style = query_style_from(entry.at("style").get<std::string>());
    t.pattern = entry.at("pattern").get<std::string>();
    table.add(std::move(t));
  }
  return table;
}

inline std::map<std::string, OracleProfile> load_profiles(const nlohmann::json& doc) {
  std::map<std::string, OracleProfile> profiles;
  for (const auto& [profile_name, rows] : doc.items()) {
    OracleProfile profile;
    profile.name = profile_name;
    for (const auto& [task_id, styles] : rows.items()) {
      for (const auto& [style_name, value] : styles.items()) {
        profile.accuracy_table[{task_id, query_style_from(style_name)}] =
            value.get<double>();
      }
    }
    profile.validate();
    profiles.emplace(profile_name, std::move(profile));
  }
  return profiles;
}

/// Regression rule patterns are written with the schema's parameter
/// names ("?f"); they are rewritten to positional references ("?0")
/// against the domain before the simulator sees them.
inline RegressionRules load_regressions(const nlohmann::json& doc, const Domain& domain) {
  auto translate = [&domain](const std::string& schema_name,
                             const nlohmann::json& atom) -> AtomPattern {
    const ActionSchema* schema = nullptr;
    for (const auto& s : domain.schemas)
      if (s.name == schema_name) schema = &s;
    if (schema == nullptr)
      throw std::invalid_argument("regression rule names unknown schema '" + schema_name + "'");
    AtomPattern pattern;
    pattern.predicate = atom.at(0).get<std::string>();
    if (domain.find_predicate(pattern.predicate) == nullptr)
      throw std::invalid_argument("regression rule uses undeclared predicate '" +
                                  pattern.predicate + "'");
    for (std::size_t i = 1; i < atom.size(); ++i) {
      std::string arg = atom.at(i).get<std::string>();
      if (!arg.empty() && arg[0] == '?') {
        bool found = false;
        for (std::size_t p = 0; p < schema->parameters.size(); ++p) {
          if (schema->parameters[p].name == arg) {
            arg = "?" + std::to_string(p);
            found = true;
            break;
          }
        }
        if (!found)
          throw std::invalid_argument("regression rule for '" + schema_name +
                                      "' uses unknown parameter '" + arg + "'");
      }
      pattern.args.push_back(std::move(arg));
    }
    return pattern;
  };

  RegressionRules rules;
  for (const auto& [schema_name, candidates] : doc.items()) {
    for (const auto& candidate : candidates) {
      RegressionCandidate c;
      for (const auto& atom : candidate.value("reverts", nlohmann::json::array()))
        c.reverts.push_back(translate(schema_name, atom));
      for (const auto& atom : candidate.value("restores", nlohmann::json::array()))
        c.restores.push_back(translate(schema_name, atom));
      rules[schema_name].push_back(std::move(c));
    }
  }
  return rules;
}

inline ImageManifest load_manifest(const std::string& path) {
  nlohmann::json doc = read_json_file(path);
  ImageManifest manifest;
  for (const auto& [action, pools] : doc.items()) {
    ImagePool pool;
    pool.success = pools.at("success").get<std::vector<std::string>>();
    pool.failure = pools.at("failure").get<std::vector<std::string>>();
    manifest.emplace(action, std::move(pool));
  }
  validate_manifest(manifest);
  return manifest;
}

/// One bundled task: parsed sources, the grounded problem, and the
/// fallback-location map harvested from its initial state.
struct TaskBundle {
  std::string id;
  Problem problem;
  GroundTask task;
  FallbackMap fallback;
};

/// Everything under the asset root: the shared domain, the task
/// registry, question templates, oracle profiles, and regression rules.
class AssetLibrary {
 public:
  static AssetLibrary load(const std::string& root) {
    namespace fs = std::filesystem;
    AssetLibrary lib;
    lib.root_ = root;
    nlohmann::json registry = read_json_file((fs::path(root) / "tasks.json").string());

    std::string domain_file = registry.at("domain").get<std::string>();
    lib.domain_ = parse_domain(read_text_file((fs::path(root) / domain_file).string()));

    for (const auto& [task_id, problem_file] : registry.at("problems").items()) {
      TaskBundle bundle;
      bundle.id = task_id;
      bundle.problem = parse_problem(
          read_text_file((fs::path(root) / problem_file.get<std::string>()).string()),
          lib.domain_);
      bundle.task = ground(lib.domain_, bundle.problem);
      bundle.task.id = task_id;
      bundle.fallback = make_fallback_map(bundle.task);
      lib.tasks_.emplace(task_id, std::move(bundle));
    }

    lib.templates_ =
        load_templates(read_json_file((fs::path(root) / "templates.json").string()));
    lib.profiles_ = load_profiles(read_json_file((fs::path(root) / "profiles.json").string()));
    lib.regressions_ = load_regressions(
        read_json_file((fs::path(root) / "regressions.json").string()), lib.domain_);
    return lib;
  }

  const Domain& domain() const { return domain_; }

  const TaskBundle& task(const std::string& id) const {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) throw std::out_of_range("unknown task asset '" + id + "'");
    return it->second;
  }

  std::vector<std::string> task_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, bundle] : tasks_) ids.push_back(id);
    return ids;
  }

  const TemplateTable& templates() const { return templates_; }

  const OracleProfile& profile(const std::string& id) const {
    auto it = profiles_.find(id);
    if (it == profiles_.end()) throw std::out_of_range("unknown oracle profile '" + id + "'");
    return it->second;
  }

  const RegressionRules& regressions() const { return regressions_; }
  const std::string& root() const { return root_; }

 private:
  std::string root_;
  Domain domain_;
  std::map<std::string, TaskBundle> tasks_;
  TemplateTable templates_;
  std::map<std::string, OracleProfile> profiles_;
  RegressionRules regressions_;
};

}  // namespace planqa
