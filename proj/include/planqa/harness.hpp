#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "planqa/assets.hpp"
#include "planqa/executive.hpp"
#include "planqa/rng.hpp"

namespace planqa {

inline constexpr const char* kToolVersion = "planqa 0.1.0";

struct ExperimentConfig {
  std::vector<std::string> tasks;
  std::vector<Policy> policies;
  int trials_per_cell = 1000;
  std::uint64_t master_seed = 0;
  WorldConfig world;  // per-trial seeds are derived, the seed field is ignored
  std::string profile = "table2";
  Budgets budgets;

  void validate() const {
    if (trials_per_cell < 1) throw std::invalid_argument("trials_per_cell must be >= 1");
    world.validate();
    budgets.validate();
  }

  nlohmann::json to_json() const {
    nlohmann::json policies_json = nlohmann::json::array();
    for (Policy p : policies) policies_json.push_back(to_string(p));
    return {{"tasks", tasks},
            {"policies", policies_json},
            {"trials_per_cell", trials_per_cell},
            {"master_seed", master_seed},
            {"world", {{"p_fail", world.p_fail}, {"p_regress", world.p_regress}}},
            {"profile", profile},
            {"budgets",
             {{"max_retries_per_action", budgets.max_retries_per_action},
              {"max_replans", budgets.max_replans},
              {"max_total_steps", budgets.max_total_steps}}}};
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig config;
    config.tasks = j.at("tasks").get<std::vector<std::string>>();
    for (const auto& name : j.at("policies"))
      config.policies.push_back(policy_from(name.get<std::string>()));
    config.trials_per_cell = j.value("trials_per_cell", 1000);
    config.master_seed = j.value("master_seed", std::uint64_t{0});
    if (j.contains("world")) {
      config.world.p_fail = j["world"].value("p_fail", 0.25);
      config.world.p_regress = j["world"].value("p_regress", 0.25);
    }
    config.profile = j.value("profile", std::string("table2"));
    if (j.contains("budgets")) {
      const auto& b = j["budgets"];
      config.budgets.max_retries_per_action = b.value("max_retries_per_action", 10);
      config.budgets.max_replans = b.value("max_replans", 10);
      config.budgets.max_total_steps = b.value("max_total_steps", 100);
    }
    return config;
  }
};

/// Reads a config file and applies the PLANQA_MASTER_SEED environment
/// override, the only field an environment variable may change.
inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read experiment config '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in);
  ExperimentConfig config = ExperimentConfig::from_json(j);
  if (const char* env = std::getenv("PLANQA_MASTER_SEED"))
    config.master_seed = std::stoull(env);
  return config;
}

// ---------------------------------------------------------------------------
// Wilson score interval
// ---------------------------------------------------------------------------

struct RateSummary {
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Wilson 95% score interval; well behaved at rates of exactly 0 and 1,
/// where perfect-oracle cells sit.
inline RateSummary summarize(int successes, int trials) {
  if (trials < 1) throw std::invalid_argument("summarize: trials must be >= 1");
  if (successes < 0 || successes > trials)
    throw std::invalid_argument("summarize: successes outside [0, trials]");
  constexpr double z = 1.959963984540054;
  const double n = trials;
  const double p = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  RateSummary s;
  s.rate = p;
  s.ci_low = std::max(0.0, center - half);
  s.ci_high = std::min(1.0, center + half);
  return s;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct CellSummary {
  std::string task;
  Policy policy = Policy::Tpvqa;
  int trials = 0;
  int successes = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_steps = 0.0;
  double mean_replans = 0.0;
  std::uint64_t seed = 0;  // cell substream seed
};

struct Report {
  nlohmann::json config_echo;
  std::vector<CellSummary> cells;
  std::string tool_version = kToolVersion;
  /// Measured but never serialized: emitted reports must be byte-identical
  /// across runs, so timing goes to the error stream instead.
  double wall_clock_seconds = 0.0;

  const CellSummary& cell(const std::string& task, Policy policy) const {
    for (const auto& c : cells)
      if (c.task == task && c.policy == policy) return c;
    throw std::out_of_range("no cell for (" + task + ", " + to_string(policy) + ")");
  }
};

namespace detail {

inline std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

inline std::string report_csv(const Report& report) {
  std::string out =
      "task,policy,trials,successes,rate,ci_low,ci_high,mean_steps,mean_replans\n";
  for (const auto& c : report.cells) {
    out += c.task;
    out += ',';
    out += to_string(c.policy);
    out += ',';
    out += std::to_string(c.trials);
    out += ',';
    out += std::to_string(c.successes);
    out += ',';
    out += detail::fixed6(c.rate);
    out += ',';
    out += detail::fixed6(c.ci_low);
    out += ',';
    out += detail::fixed6(c.ci_high);
    out += ',';
    out += detail::fixed6(c.mean_steps);
    out += ',';
    out += detail::fixed6(c.mean_replans);
    out += '\n';
  }
  return out;
}

inline std::string report_json(const Report& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"task", c.task},
                     {"policy", to_string(c.policy)},
                     {"trials", c.trials},
                     {"successes", c.successes},
                     {"rate", c.rate},
                     {"ci_low", c.ci_low},
                     {"ci_high", c.ci_high},
                     {"mean_steps", c.mean_steps},
                     {"mean_replans", c.mean_replans},
                     {"seed", c.seed}});
  }
  nlohmann::json j = {{"config", report.config_echo},
                      {"tool_version", report.tool_version},
                      {"cells", std::move(cells)}};
  return j.dump(2) + "\n";
}

enum class ReportFormat { Csv, Json };

inline ReportFormat report_format_from(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw std::invalid_argument("unknown report format '" + name + "' (csv|json)");
}

inline void emit_report(const Report& report, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report to '" + path + "'");
  out << (format == ReportFormat::Csv ? report_csv(report) : report_json(report));
  if (!out) throw std::runtime_error("failed writing report to '" + path + "'");
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

/// Runs trials_per_cell seeded trials for every (task, policy) cell.
/// Trial seeds depend only on (master_seed, task, policy, trial index)
/// and aggregation reduces in trial order, so serial and parallel runs
/// emit byte-identical reports.
inline Report run_experiment(const ExperimentConfig& config, const AssetLibrary& assets,
                             int threads = 1) {
  config.validate();
  if (threads < 1) threads = 1;
  const OracleProfile& profile = assets.profile(config.profile);
  const auto start = std::chrono::steady_clock::now();

  Report report;
  report.config_echo = config.to_json();

  for (const auto& task_id : config.tasks) {
    const TaskBundle& bundle = assets.task(task_id);
    validate_template_coverage(assets.templates(), bundle.task);
    WorldConfig world_config = config.world;
    world_config.regression_rules = assets.regressions();

    for (Policy policy : config.policies) {
      const std::uint64_t cell = cell_seed(config.master_seed, task_id, to_string(policy));
      const int trials = config.trials_per_cell;

      struct TrialStats {
        bool completed = false;
        int steps = 0;
        int replans = 0;
      };
      std::vector<TrialStats> stats(trials);
      std::mutex error_mutex;
      std::string first_error;

      auto worker = [&](int offset) {
        for (int i = offset; i < trials; i += threads) {
          const std::uint64_t seed = trial_seed(cell, static_cast<std::uint64_t>(i));
          try {
            TrialResult r = run_trial(policy, bundle.task, world_config, assets.templates(),
                                      profile, bundle.fallback, config.budgets, seed);
            stats[i] = {r.completed, r.steps_taken, r.replans};
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (first_error.empty())
              first_error = "trial seed " + std::to_string(seed) + " (" + task_id + ", " +
                            to_string(policy) + "): " + e.what();
          }
        }
      };

      if (threads == 1) {
        worker(0);
      } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& t : pool) t.join();
      }
      if (!first_error.empty()) throw std::runtime_error(first_error);

      CellSummary summary;
      summary.task = task_id;
      summary.policy = policy;
      summary.trials = trials;
      summary.seed = cell;
      double steps_sum = 0.0;
      double replans_sum = 0.0;
      for (const auto& s : stats) {
        summary.successes += s.completed ? 1 : 0;
        steps_sum += s.steps;
        replans_sum += s.replans;
      }
      RateSummary rate = summarize(summary.successes, trials);
      summary.rate = rate.rate;
      summary.ci_low = rate.ci_low;
      summary.ci_high = rate.ci_high;
      summary.mean_steps = steps_sum / trials;
      summary.mean_replans = replans_sum / trials;
      report.cells.push_back(std::move(summary));
    }
  }

  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace planqa
