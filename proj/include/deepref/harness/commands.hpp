#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "deepref/agents/agents.hpp"
#include "deepref/env/policy.hpp"
#include "deepref/harness/config.hpp"
#include "deepref/metrics/metrics.hpp"
#include "deepref/trace/trace_prep.hpp"

namespace deepref::harness {

// Command-line overrides; unset fields fall back to the config.
struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> edge;
  std::optional<int> target_edge;
  std::optional<int> capacity;
  std::optional<std::string> policy;
  std::optional<std::string> out;
};

// Directory layout under the output root.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path prepared() const { return root / "prepared"; }
  std::filesystem::path catalog() const { return prepared() / "catalog.csv"; }
  std::filesystem::path train_trace(int edge) const;
  std::filesystem::path test_trace(int edge) const;
  std::filesystem::path train_run(int edge, const std::string& agent, int capacity,
                                  std::uint64_t seed) const;
  std::filesystem::path eval_run(int edge, const std::string& policy, int capacity,
                                 std::uint64_t seed) const;
  std::filesystem::path transfer_run(int source, int target, const std::string& policy, int capacity,
                                     std::uint64_t seed) const;
  std::filesystem::path report() const { return root / "report"; }
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string code_version;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;
};

std::string code_version();
std::string manifest_json(const RunManifest& manifest);

// Consecutive non-overlapping windows of `length`; a trailing partial
// window is dropped.
std::vector<std::span<const trace::Request>> episode_windows(std::span<const trace::Request> trace,
                                                             std::size_t length);

// Inputs a policy may need.
struct PolicyContext {
  const trace::Catalog* catalog = nullptr;
  std::span<const trace::Request> ranking_trace;  // for topk-pop
  int capacity = 0;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> checkpoint;  // for dqn / drqn
  agents::AgentConfig agent;
};

std::unique_ptr<env::Policy> make_policy(const std::string& name, const PolicyContext& context);

struct Evaluation {
  metrics::MetricsReport report;
  std::vector<metrics::Counters> episodes;
};

// Greedy evaluation over every window; `env_config.capacity` must be set.
Evaluation evaluate(env::Policy& policy, const trace::Catalog& catalog, env::EnvConfig env_config,
                    std::span<const trace::Request> trace, std::size_t episode_length);

// Each command returns the files it wrote.
std::vector<std::filesystem::path> cmd_prepare(const ExperimentConfig& config, const CommandOptions& opts);
std::vector<std::filesystem::path> cmd_train(const ExperimentConfig& config, const CommandOptions& opts);
std::vector<std::filesystem::path> cmd_eval(const ExperimentConfig& config, const CommandOptions& opts);
std::vector<std::filesystem::path> cmd_transfer(const ExperimentConfig& config, const CommandOptions& opts);
std::vector<std::filesystem::path> cmd_report(const ExperimentConfig& config, const CommandOptions& opts);

// Report pivot: one line per (split, edge, source edge, policy), one cell
// per capacity. Cells average rows over seeds.
struct ReportCell {
  double accuracy = 0.0;
  double coverage = 0.0;
  double aggressiveness = 0.0;
  std::optional<double> timeliness_mean;
  std::optional<double> timeliness_std;
  std::size_t seeds = 0;
};

struct ReportLine {
  std::string split;
  int edge_id = 0;
  std::optional<int> source_edge;
  std::string policy;
  std::vector<std::optional<ReportCell>> cells;  // aligned with capacities
};

struct ReportTable {
  std::vector<int> capacities;
  std::vector<ReportLine> lines;
};

ReportTable pivot(std::span<const metrics::ParsedRow> rows);
std::string render_csv(const ReportTable& table);
std::string render_text(const ReportTable& table);

}  // namespace deepref::harness
