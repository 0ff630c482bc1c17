#include "deepref/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "deepref/error.hpp"

namespace deepref::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto piece = trim(value.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

template <typename T>
std::string format_number(T value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, std::string>) {
      out += values[i];
    } else {
      out += format_number(values[i]);
    }
  }
  return out;
}

struct KeySpec {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T, typename Access>
KeySpec number_key(const std::string& name, Access access) {
  return {[name, access](ExperimentConfig& c, const std::string& v) { access(c) = parse_number<T>(name, v); },
          [access](const ExperimentConfig& c) {
            return format_number(access(c));
          }};
}

template <typename Access>
KeySpec string_key(Access access) {
  return {[access](ExperimentConfig& c, const std::string& v) { access(c) = v; },
          [access](const ExperimentConfig& c) { return access(c); }};
}

template <typename T, typename Access>
KeySpec list_key(const std::string& name, Access access) {
  return {[name, access](ExperimentConfig& c, const std::string& v) {
            std::vector<T> values;
            for (const auto& piece : split_list(v)) {
              if constexpr (std::is_same_v<T, std::string>) {
                values.push_back(piece);
              } else {
                values.push_back(parse_number<T>(name, piece));
              }
            }
            if (values.empty()) throw ConfigError("config key '" + name + "': empty list");
            access(c) = std::move(values);
          },
          [access](const ExperimentConfig& c) { return join(access(c)); }};
}

#define DEEPREF_FIELD(expr) [](auto& c) -> auto& { return c.expr; }

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = [] {
    std::map<std::string, KeySpec> t;
    t["data_dir"] = string_key(DEEPREF_FIELD(data_dir));
    t["ratings_path"] = string_key(DEEPREF_FIELD(ratings_path));
    t["users_path"] = string_key(DEEPREF_FIELD(users_path));
    t["geocode_path"] = string_key(DEEPREF_FIELD(geocode_path));
    t["output_dir"] = string_key(DEEPREF_FIELD(output_dir));
    t["edges"] = number_key<int>("edges", DEEPREF_FIELD(edges));
    t["data_seed"] = number_key<std::uint64_t>("data_seed", DEEPREF_FIELD(data_seed));
    t["size_min"] = number_key<double>("size_min", DEEPREF_FIELD(size_min));
    t["size_max"] = number_key<double>("size_max", DEEPREF_FIELD(size_max));
    t["cwnd_bytes"] = number_key<double>("cwnd_bytes", DEEPREF_FIELD(cwnd_bytes));
    t["rtt_seconds"] = number_key<double>("rtt_seconds", DEEPREF_FIELD(rtt_seconds));
    t["train_frac"] = number_key<double>("train_frac", DEEPREF_FIELD(train_frac));
    t["train_edge"] = number_key<int>("train_edge", DEEPREF_FIELD(train_edge));
    t["transfer_edge"] = number_key<int>("transfer_edge", DEEPREF_FIELD(transfer_edge));
    t["silhouette_k_min"] = number_key<int>("silhouette_k_min", DEEPREF_FIELD(silhouette_k_min));
    t["silhouette_k_max"] = number_key<int>("silhouette_k_max", DEEPREF_FIELD(silhouette_k_max));
    t["capacities"] = list_key<int>("capacities", DEEPREF_FIELD(capacities));
    t["episode_length"] = number_key<std::size_t>("episode_length", DEEPREF_FIELD(episode_length));
    t["train_episodes"] = number_key<std::int64_t>("train_episodes", DEEPREF_FIELD(train_episodes));
    t["policies"] = list_key<std::string>("policies", DEEPREF_FIELD(policies));
    t["seeds"] = list_key<std::uint64_t>("seeds", DEEPREF_FIELD(seeds));
    t["agent.gamma"] = number_key<double>("agent.gamma", DEEPREF_FIELD(agent.gamma));
    t["agent.learning_rate"] = number_key<double>("agent.learning_rate", DEEPREF_FIELD(agent.learning_rate));
    t["agent.optimizer"] = string_key(DEEPREF_FIELD(agent.optimizer));
    t["agent.epsilon_start"] = number_key<double>("agent.epsilon_start", DEEPREF_FIELD(agent.epsilon_start));
    t["agent.epsilon_end"] = number_key<double>("agent.epsilon_end", DEEPREF_FIELD(agent.epsilon_end));
    t["agent.epsilon_decay_episodes"] =
        number_key<std::int64_t>("agent.epsilon_decay_episodes", DEEPREF_FIELD(agent.epsilon_decay_episodes));
    t["agent.dqn_buffer_capacity"] =
        number_key<std::size_t>("agent.dqn_buffer_capacity", DEEPREF_FIELD(agent.dqn_buffer_capacity));
    t["agent.drqn_buffer_capacity"] =
        number_key<std::size_t>("agent.drqn_buffer_capacity", DEEPREF_FIELD(agent.drqn_buffer_capacity));
    t["agent.dqn_batch_size"] = number_key<std::size_t>("agent.dqn_batch_size", DEEPREF_FIELD(agent.dqn_batch_size));
    t["agent.drqn_batch_size"] =
        number_key<std::size_t>("agent.drqn_batch_size", DEEPREF_FIELD(agent.drqn_batch_size));
    t["agent.target_update_period"] =
        number_key<std::int64_t>("agent.target_update_period", DEEPREF_FIELD(agent.target_update_period));
    t["agent.dqn_train_every"] = number_key<std::size_t>("agent.dqn_train_every", DEEPREF_FIELD(agent.dqn_train_every));
    t["agent.drqn_updates_per_episode"] =
        number_key<std::size_t>("agent.drqn_updates_per_episode", DEEPREF_FIELD(agent.drqn_updates_per_episode));
    t["agent.history"] = number_key<std::size_t>("agent.history", DEEPREF_FIELD(agent.history));
    t["agent.k1"] = number_key<std::size_t>("agent.k1", DEEPREF_FIELD(agent.k1));
    t["agent.k2"] = number_key<std::size_t>("agent.k2", DEEPREF_FIELD(agent.k2));
    t["agent.hidden_size"] = number_key<std::size_t>("agent.hidden_size", DEEPREF_FIELD(agent.hidden_size));
    t["agent.grad_clip"] = number_key<double>("agent.grad_clip", DEEPREF_FIELD(agent.grad_clip));
    return t;
  }();
  return table;
}

#undef DEEPREF_FIELD

std::filesystem::path input_path(const std::string& explicit_path, const std::string& data_dir,
                                 const char* relative) {
  if (!explicit_path.empty()) return explicit_path;
  return std::filesystem::path(data_dir.empty() ? "data" : data_dir) / relative;
}

}  // namespace

std::filesystem::path ExperimentConfig::ratings() const {
  return input_path(ratings_path, data_dir, "ml-100k/u.data");
}
std::filesystem::path ExperimentConfig::users() const {
  return input_path(users_path, data_dir, "ml-100k/u.user");
}
std::filesystem::path ExperimentConfig::geocode() const {
  return input_path(geocode_path, data_dir, "zip_geo.csv");
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
  if (edges < 1) fail("edges must be >= 1");
  if (!(size_min > 0.0 && size_max > size_min)) fail("need size_max > size_min > 0");
  if (!(cwnd_bytes > 0.0 && rtt_seconds > 0.0)) fail("cwnd_bytes and rtt_seconds must be positive");
  if (!(train_frac > 0.0 && train_frac < 1.0)) fail("train_frac must be in (0,1)");
  if (train_edge < 0 || train_edge >= edges) fail("train_edge outside [0, edges)");
  if (transfer_edge < 0 || transfer_edge >= edges) fail("transfer_edge outside [0, edges)");
  if (silhouette_k_min < 2 || silhouette_k_max < silhouette_k_min) fail("bad silhouette k range");
  for (int c : capacities) {
    if (c < 1) fail("capacities must be >= 1");
  }
  if (episode_length == 0) fail("episode_length must be >= 1");
  if (train_episodes < 1) fail("train_episodes must be >= 1");
  for (const auto& p : policies) {
    if (std::find(all_policies().begin(), all_policies().end(), p) == all_policies().end()) {
      fail("unknown policy '" + p + "'");
    }
  }
  if (seeds.empty()) fail("seeds must not be empty");
  agent.validate();
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  if (const char* env = std::getenv("DEEPREF_DATA_DIR"); env && *env) c.data_dir = env;
  return c;
}

void set_key(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const auto& table = key_table();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(config, value);
}

void apply_config(ExperimentConfig& config, std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": repeated key '" + key + "'");
    }
    try {
      set_key(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  auto config = default_config();
  apply_config(config, in, path.string());
  return config;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : key_table()) keys.push_back(k);
  return keys;
}

std::vector<std::string> canonical_lines(const ExperimentConfig& config) {
  std::vector<std::string> lines;
  for (const auto& [k, spec] : key_table()) lines.push_back(k + " = " + spec.get(config));
  return lines;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& line : canonical_lines(config)) {
    for (unsigned char ch : line + "\n") {
      h ^= ch;
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace deepref::harness
