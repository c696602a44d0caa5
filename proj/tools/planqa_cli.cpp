// planqa command line: plan, validate plans, render queries, run single
// traced trials, and run full experiments over the bundled assets.

#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "planqa/assets.hpp"
#include "planqa/executive.hpp"
#include "planqa/harness.hpp"
#include "planqa/planner.hpp"
#include "planqa/vqa.hpp"
#include "planqa/vqa_remote.hpp"

#ifndef PLANQA_DEFAULT_ASSETS
#define PLANQA_DEFAULT_ASSETS "assets"
#endif

namespace {

using namespace planqa;

std::string default_assets() {
  if (const char* env = std::getenv("PLANQA_ASSETS")) return env;
  return PLANQA_DEFAULT_ASSETS;
}

GroundTask load_task_files(const std::string& domain_path, const std::string& problem_path) {
  Domain domain = parse_domain(read_text_file(domain_path));
  Problem problem = parse_problem(read_text_file(problem_path), domain);
  return ground(domain, problem);
}

// "name(a, b)" -> (name, [a, b]); bare "name" means no arguments.
std::pair<std::string, std::vector<std::string>> parse_call(const std::string& text) {
  auto open = text.find('(');
  if (open == std::string::npos) return {text, {}};
  auto close = text.rfind(')');
  if (close == std::string::npos || close < open)
    throw std::invalid_argument("expected name(arg, ...), got '" + text + "'");
  std::string name = text.substr(0, open);
  std::vector<std::string> args;
  std::string arg;
  std::stringstream body(text.substr(open + 1, close - open - 1));
  while (std::getline(body, arg, ',')) {
    auto a = arg.find_first_not_of(" \t");
    auto b = arg.find_last_not_of(" \t");
    if (a == std::string::npos) continue;
    args.push_back(arg.substr(a, b - a + 1));
  }
  return {name, args};
}

int cmd_plan(const std::string& domain_path, const std::string& problem_path,
             const std::string& plan_out) {
  GroundTask task = load_task_files(domain_path, problem_path);
  PlanOutcome outcome = plan(task);
  if (outcome.status == PlanOutcome::Unsolvable) {
    std::cerr << "unsolvable: no plan reaches the goal\n";
    return 1;
  }
  if (outcome.status == PlanOutcome::BudgetExceeded) {
    std::cerr << "search budget exceeded after " << outcome.expansions << " expansions\n";
    return 1;
  }
  std::cout << outcome.plan.str();
  if (!plan_out.empty()) write_plan(outcome.plan, plan_out);
  return 0;
}

int cmd_validate(const std::string& domain_path, const std::string& problem_path,
                 const std::string& plan_path) {
  GroundTask task = load_task_files(domain_path, problem_path);
  Plan plan = read_plan_file(plan_path, task);
  State state = task.init;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    if (!applicable(state, plan.steps[i])) {
      std::cerr << "invalid plan: step " << (i + 1) << " inapplicable ("
                << plan.steps[i].name() << ")\n";
      return 1;
    }
    state = apply(state, plan.steps[i], ApplyMode::Permissive);
  }
  if (!state_includes(state, task.goal)) {
    std::cerr << "invalid plan: goal not satisfied after final step\n";
    return 1;
  }
  std::cout << "valid plan: " << plan.steps.size() << " steps\n";
  return 0;
}

int cmd_query(const std::string& assets_root, const std::string& atom_text,
              const std::string& action_text, const std::string& style_name) {
  QueryStyle style = query_style_from(style_name);
  AssetLibrary assets = AssetLibrary::load(assets_root);
  if (atom_text.empty() == action_text.empty())
    throw std::invalid_argument("provide exactly one of --atom or --action");
  auto [name, args] = parse_call(atom_text.empty() ? action_text : atom_text);
  if (!atom_text.empty() && !is_predicate_style(style))
    throw std::invalid_argument("--atom takes --style precondition|effect");
  if (!action_text.empty() && is_predicate_style(style))
    throw std::invalid_argument("--action takes --style affordance|success");
  std::cout << assets.templates().render(name, style, args) << "\n";
  return 0;
}

struct TrialFlags {
  std::string policy = "tpvqa";
  std::string task = "clean_dishes";
  std::uint64_t seed = 0;
  std::string config_path;
  std::string profile = "table2";
  std::string endpoint;
  std::string manifest_path;
  bool trace = false;
};

int cmd_trial(const std::string& assets_root, const TrialFlags& flags) {
  AssetLibrary assets = AssetLibrary::load(assets_root);
  const TaskBundle& bundle = assets.task(flags.task);
  validate_template_coverage(assets.templates(), bundle.task);

  WorldConfig world_config;
  Budgets budgets;
  if (!flags.config_path.empty()) {
    nlohmann::json j = read_json_file(flags.config_path);
    if (j.contains("world")) {
      world_config.p_fail = j["world"].value("p_fail", world_config.p_fail);
      world_config.p_regress = j["world"].value("p_regress", world_config.p_regress);
    }
    if (j.contains("budgets")) {
      const auto& b = j["budgets"];
      budgets.max_retries_per_action =
          b.value("max_retries_per_action", budgets.max_retries_per_action);
      budgets.max_replans = b.value("max_replans", budgets.max_replans);
      budgets.max_total_steps = b.value("max_total_steps", budgets.max_total_steps);
    }
  }
  world_config.regression_rules = assets.regressions();

  std::optional<ImageManifest> manifest;
  if (!flags.manifest_path.empty()) manifest = load_manifest(flags.manifest_path);

  TrialResult result;
  if (!flags.endpoint.empty()) {
    if (!manifest)
      std::cerr << "note: no --manifest given, remote queries carry empty image refs\n";
    RemoteOracle oracle(flags.endpoint);
    result = run_trial(policy_from(flags.policy), bundle.task, world_config,
                       assets.templates(), oracle, bundle.fallback, budgets, flags.seed,
                       manifest);
  } else {
    result = run_trial(policy_from(flags.policy), bundle.task, world_config,
                       assets.templates(), assets.profile(flags.profile), bundle.fallback,
                       budgets, flags.seed, manifest);
  }

  if (flags.trace) std::cout << trace_to_ldjson(result.trace);
  std::cout << result.to_json().dump() << "\n";
  return 0;
}

int cmd_experiment(const std::string& assets_root, const std::string& config_path,
                   const std::string& out_path, const std::string& format_name, int threads) {
  AssetLibrary assets = AssetLibrary::load(assets_root);
  ExperimentConfig config = load_experiment_config(config_path);
  Report report = run_experiment(config, assets, threads);
  emit_report(report, report_format_from(format_name), out_path);
  std::cerr << "wrote " << report.cells.size() << " cells to " << out_path << " in "
            << report.wall_clock_seconds << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop plan execution monitoring with yes/no perception queries"};
  app.require_subcommand(1);

  std::string assets_root = default_assets();
  app.add_option("--assets", assets_root, "asset directory (default: bundled assets)");

  std::string domain_path, problem_path, plan_path, plan_out;
  auto* plan_cmd = app.add_subcommand("plan", "compute a plan for a domain/problem pair");
  plan_cmd->add_option("--domain", domain_path, "domain .pddl file")->required();
  plan_cmd->add_option("--problem", problem_path, "problem .pddl file")->required();
  plan_cmd->add_option("--out", plan_out, "also write the plan to this file");

  auto* validate_cmd = app.add_subcommand("validate", "check a plan file against a task");
  validate_cmd->add_option("--domain", domain_path, "domain .pddl file")->required();
  validate_cmd->add_option("--problem", problem_path, "problem .pddl file")->required();
  validate_cmd->add_option("--plan", plan_path, "plan file, one action per line")->required();

  std::string atom_text, action_text, style_name = "precondition";
  auto* query_cmd = app.add_subcommand("query", "render a natural-language question");
  query_cmd->add_option("--atom", atom_text, "ground atom, e.g. \"in_hand(plate)\"");
  query_cmd->add_option("--action", action_text, "ground action, e.g. \"wash(plate)\"");
  query_cmd->add_option("--style", style_name, "precondition|effect|affordance|success");

  TrialFlags trial_flags;
  auto* trial_cmd = app.add_subcommand("trial", "run one seeded closed-loop trial");
  trial_cmd->add_option("--policy", trial_flags.policy,
                        "tpvqa|effectvqa|tp|successvqa|palmevqa");
  trial_cmd->add_option("--task", trial_flags.task,
                        "clean_dishes|serve_breakfast|eat_apple");
  trial_cmd->add_option("--seed", trial_flags.seed, "trial seed");
  trial_cmd->add_option("--config", trial_flags.config_path, "world/budget config JSON");
  trial_cmd->add_option("--profile", trial_flags.profile, "oracle profile id");
  trial_cmd->add_option("--endpoint", trial_flags.endpoint, "remote VQA service address");
  trial_cmd->add_option("--manifest", trial_flags.manifest_path, "image manifest JSON");
  trial_cmd->add_flag("--trace", trial_flags.trace, "emit the event log as JSON lines");

  std::string config_path, out_path, format_name = "csv";
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  auto* experiment_cmd = app.add_subcommand("experiment", "run a full experiment sweep");
  experiment_cmd->add_option("--config", config_path, "experiment config JSON")->required();
  experiment_cmd->add_option("--out", out_path, "report output path")->required();
  experiment_cmd->add_option("--format", format_name, "csv|json");
  experiment_cmd->add_option("--threads", threads, "worker threads (default: hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*plan_cmd) return cmd_plan(domain_path, problem_path, plan_out);
    if (*validate_cmd) return cmd_validate(domain_path, problem_path, plan_path);
    if (*query_cmd) return cmd_query(assets_root, atom_text, action_text, style_name);
    if (*trial_cmd) return cmd_trial(assets_root, trial_flags);
    if (*experiment_cmd)
      return cmd_experiment(assets_root, config_path, out_path, format_name, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
