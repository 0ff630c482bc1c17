#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "deepref/env/policy.hpp"
#include "deepref/env/prefetch_env.hpp"
#include "deepref/error.hpp"
#include "deepref/nn/networks.hpp"
#include "deepref/nn/optim.hpp"

namespace deepref::agents {

enum class AgentKind { kDqn, kDrqn };

std::string to_string(AgentKind kind);
AgentKind parse_agent_kind(const std::string& name);

struct AgentConfig {
  double gamma = 0.99;
  double learning_rate = 1e-4;
  std::string optimizer = "adam";  // adam | sgd
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  // Linear decay length in episodes; 0 means half the training episodes.
  std::int64_t epsilon_decay_episodes = 0;
  std::size_t dqn_buffer_capacity = 10000;  // transitions
  std::size_t drqn_buffer_capacity = 500;   // episodes
  std::size_t dqn_batch_size = 32;          // transitions
  std::size_t drqn_batch_size = 4;          // episodes
  std::int64_t target_update_period = 1000;  // decisions
  std::size_t dqn_train_every = 4;          // decisions between DQN updates
  std::size_t drqn_updates_per_episode = 1;
  std::size_t history = 4;
  std::size_t k1 = 300;
  std::size_t k2 = 300;
  std::size_t hidden_size = 512;
  double grad_clip = 10.0;  // global norm; <= 0 disables
  std::uint64_t seed = 1;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

// Linear from start to end over decay_episodes, then flat at end.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  std::int64_t decay_episodes = 1;

  double value(std::int64_t episode) const;
};

// Uniform over all actions with probability epsilon, else argmax with the
// lowest index winning ties.
std::uint32_t select_action(std::span<const double> q_values, double epsilon, std::mt19937_64& rng);
std::uint32_t argmax(std::span<const double> values);

double td_target(double reward, std::span<const double> next_q_values, bool done, double gamma);

struct Transition {
  env::Observation observation;
  env::Action action;
  double reward = 0.0;
  env::Observation next_observation;
  bool done = false;
};

struct EpisodeSequence {
  std::vector<Transition> transitions;
};

// Fixed-capacity ring; a full buffer drops its oldest item.
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw UsageError("replay buffer: zero capacity");
  }

  void push(T item) {
    if constexpr (std::is_same_v<T, EpisodeSequence>) {
      if (item.transitions.empty()) throw UsageError("replay buffer: empty episode");
    }
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(item));
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  // 0 is the oldest item.
  const T& operator[](std::size_t i) const { return items_[i]; }

  // Uniform indices, with replacement.
  std::vector<std::size_t> sample_indices(std::size_t count, std::mt19937_64& rng) const {
    if (items_.empty()) throw UsageError("replay buffer: sampling from empty buffer");
    std::uniform_int_distribution<std::size_t> dist(0, items_.size() - 1);
    std::vector<std::size_t> out(count);
    for (auto& i : out) i = dist(rng);
    return out;
  }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
};

nn::LayerInput to_input(const env::Observation& observation);

// One optimizer step over a gradient object of the same shape as `net`.
// Averages by `count`, clips, then applies Adam or SGD.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(std::span<const nn::Tensor> params, const AgentConfig& config);

  void apply(std::span<nn::Tensor> params, std::span<nn::Tensor> grads, double count);

 private:
  nn::AdamState adam_;
  nn::AdamConfig adam_config_;
  bool use_sgd_ = false;
  double lr_ = 1e-4;
  double clip_ = 0.0;
};

// Common surface of the learned prefetchers.
class LearningAgent : public env::Policy {
 public:
  explicit LearningAgent(const AgentConfig& config);

  void set_explore(bool explore) override { explore_ = explore; }
  bool explore() const { return explore_; }
  void set_epsilon(double epsilon) { epsilon_ = epsilon; }
  double epsilon() const { return epsilon_; }
  const AgentConfig& config() const { return config_; }
  std::int64_t decisions() const { return decisions_; }
  std::int64_t updates() const { return updates_; }

  virtual AgentKind kind() const = 0;
  // Feeds back the outcome of the last act(). Returns the loss of any
  // update that ran.
  virtual std::optional<double> observe(const Transition& t) = 0;
  // Returns the loss of any update that ran.
  virtual std::optional<double> end_episode() { return std::nullopt; }
  virtual void save(const std::filesystem::path& path) = 0;

 protected:
  std::uint32_t choose(const nn::Vector& q);

  AgentConfig config_;
  std::mt19937_64 rng_;
  bool explore_ = true;
  double epsilon_ = 0.0;
  std::int64_t decisions_ = 0;
  std::int64_t updates_ = 0;
};

class DqnAgent : public LearningAgent {
 public:
  DqnAgent(std::size_t num_items, const AgentConfig& config);
  DqnAgent(nn::FeedForwardQNet net, const AgentConfig& config);

  std::string name() const override { return "dqn"; }
  AgentKind kind() const override { return AgentKind::kDqn; }
  void configure(env::EnvConfig& config) const override;
  env::Action act(const env::PrefetchEnv& env, const env::Observation& observation) override;
  std::optional<double> observe(const Transition& t) override;
  void save(const std::filesystem::path& path) override;

  // Samples a batch and takes one gradient step. nullopt when the buffer is
  // smaller than the batch.
  std::optional<double> train_step();
  void sync_target();

  nn::FeedForwardQNet& online() { return online_; }
  const nn::FeedForwardQNet& target() const { return target_; }
  ReplayBuffer<Transition>& buffer() { return buffer_; }

 private:
  nn::FeedForwardQNet online_, target_, grads_;
  Optimizer optimizer_;
  ReplayBuffer<Transition> buffer_;
  std::int64_t last_sync_ = 0;
};

class DrqnAgent : public LearningAgent {
 public:
  DrqnAgent(std::size_t num_items, const AgentConfig& config);
  DrqnAgent(nn::RecurrentQNet net, const AgentConfig& config);

  std::string name() const override { return "drqn"; }
  AgentKind kind() const override { return AgentKind::kDrqn; }
  void configure(env::EnvConfig& config) const override;
  void begin_episode(const env::PrefetchEnv& env) override;
  env::Action act(const env::PrefetchEnv& env, const env::Observation& observation) override;
  std::optional<double> observe(const Transition& t) override;
  std::optional<double> end_episode() override;
  void save(const std::filesystem::path& path) override;

  // Replays sampled episodes from a zero state. Every k1 steps the losses
  // of those steps are backpropagated through at most k2 steps and one
  // optimizer step is taken. nullopt on an empty buffer.
  std::optional<double> train_step();
  void sync_target();

  nn::RecurrentQNet& online() { return online_; }
  const nn::RecurrentQNet& target() const { return target_; }
  ReplayBuffer<EpisodeSequence>& buffer() { return buffer_; }

 private:
  nn::RecurrentQNet online_, target_, grads_;
  Optimizer optimizer_;
  ReplayBuffer<EpisodeSequence> buffer_;
  nn::LstmState state_;
  EpisodeSequence current_;
  std::int64_t last_sync_ = 0;
};

std::unique_ptr<LearningAgent> make_agent(AgentKind kind, std::size_t num_items,
                                          const AgentConfig& config);
// Throws DataError when the checkpoint's shape differs from what `config`
// and `num_items` imply.
std::unique_ptr<LearningAgent> load_agent(AgentKind kind, const std::filesystem::path& path,
                                          std::size_t num_items, const AgentConfig& config);

struct EpisodeResult {
  EpisodeSequence sequence;
  metrics::Counters counters;
  double total_reward = 0.0;
};

using TransitionHook = std::function<void(const Transition&)>;

// Resets `env` on `window` and runs one decision per request. Learned
// policies act greedily when explore is false.
EpisodeResult run_episode(env::PrefetchEnv& env, env::Policy& policy,
                          std::span<const trace::Request> window, bool explore,
                          const TransitionHook& hook = {});

struct CurveRow {
  std::int64_t episode = 0;
  double avg_reward = 0.0;
  double epsilon = 0.0;
  std::optional<double> loss;
};

// CSV `episode,avg_reward,epsilon,loss`; missing loss is empty.
void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows);

// Trains for `episodes` episodes, each on a window of `episode_length`
// requests starting at a uniformly drawn offset in `trace` (seeded by
// config.seed). avg_reward is the mean per-step reward.
std::vector<CurveRow> train_agent(LearningAgent& agent, env::PrefetchEnv& env,
                                  std::span<const trace::Request> trace, std::size_t episode_length,
                                  std::int64_t episodes);

}  // namespace deepref::agents
