#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "deepref/agents/agents.hpp"

namespace deepref::harness {

inline const std::vector<std::string>& all_policies() {
  static const std::vector<std::string> names = {"belady",  "topk-pop", "topk-size", "pop-recent",
                                                 "pop-all", "random",   "dqn",       "drqn"};
  return names;
}

struct ExperimentConfig {
  std::string data_dir;      // default root for the three input paths
  std::string ratings_path;  // empty: <data_dir>/ml-100k/u.data
  std::string users_path;    // empty: <data_dir>/ml-100k/u.user
  std::string geocode_path;  // empty: <data_dir>/zip_geo.csv
  std::string output_dir = "runs";

  int edges = 3;
  std::uint64_t data_seed = 1;
  double size_min = 50.0;
  double size_max = 2000.0;
  double cwnd_bytes = 65536.0;
  double rtt_seconds = 0.1;
  double train_frac = 0.8;
  int train_edge = 1;
  int transfer_edge = 2;
  int silhouette_k_min = 2;
  int silhouette_k_max = 10;

  std::vector<int> capacities = {10, 50, 100};
  std::size_t episode_length = 200;
  std::int64_t train_episodes = 2000;
  std::vector<std::string> policies = all_policies();
  std::vector<std::uint64_t> seeds = {1};

  agents::AgentConfig agent;

  std::filesystem::path ratings() const;
  std::filesystem::path users() const;
  std::filesystem::path geocode() const;

  // Throws ConfigError.
  void validate() const;
};

// Defaults, with data_dir taken from DEEPREF_DATA_DIR when set.
ExperimentConfig default_config();

// `key = value` lines; `#` starts a comment; lists are comma separated.
// Unknown keys, repeated keys and malformed values are ConfigErrors.
void apply_config(ExperimentConfig& config, std::istream& in, const std::string& source);
ExperimentConfig load_config(const std::filesystem::path& path);

// Sets one key from its text form.
void set_key(ExperimentConfig& config, const std::string& key, const std::string& value);

std::vector<std::string> config_keys();

// Every key as `key = value`, sorted by key.
std::vector<std::string> canonical_lines(const ExperimentConfig& config);
// FNV-1a 64 over the canonical lines, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace deepref::harness
