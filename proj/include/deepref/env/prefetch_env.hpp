#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "deepref/env/cache.hpp"
#include "deepref/env/observation.hpp"
#include "deepref/metrics/metrics.hpp"
#include "deepref/trace/trace_prep.hpp"
#include "deepref/types.hpp"

namespace deepref::env {

// Index in [0, M]: 0..M-1 prefetch that item, M is do-not-prefetch.
struct Action {
  std::uint32_t index = 0;

  friend bool operator==(Action, Action) = default;
};

inline Action no_prefetch(std::size_t num_items) {
  return Action{static_cast<std::uint32_t>(num_items)};
}
inline Action prefetch(ItemId item) { return Action{item}; }

enum class Eviction { kLru, kBelady };

struct EnvConfig {
  std::size_t capacity = 10;
  ObservationMode mode = ObservationMode::kDrqn;
  std::size_t history = 4;
  Eviction eviction = Eviction::kLru;
  // Oracle mode: prefetching the requested item on a miss fetches it
  // synchronously and serves the request, which then counts as a hit.
  bool serve_on_fetch = false;
  bool record_log = false;
};

// Reward for one decision: hit/no-prefetch +2, hit/prefetch 2 - l,
// miss/no-prefetch -1, miss/prefetch -1 - l.
double reward_for(bool hit, std::optional<double> prefetch_latency);

struct StepOutcome {
  StepIndex step = 0;
  ItemId requested = 0;
  Action action;
  bool hit = false;
  double reward = 0.0;
  bool sent_prefetch = false;
  std::optional<ItemId> evicted;
  bool done = false;
};

struct StepResult {
  StepOutcome outcome;
  Observation observation;
};

class PrefetchEnv {
 public:
  PrefetchEnv(std::vector<double> latencies, EnvConfig config);

  // Starts an episode over `window`: empties the cache, zeroes counters and
  // returns the observation of the first request.
  Observation reset(std::span<const trace::Request> window);
  StepResult step(Action action);

  std::size_t num_items() const { return latencies_.size(); }
  std::size_t num_actions() const { return latencies_.size() + 1; }
  double latency(ItemId item) const { return latencies_.at(item); }
  const EnvConfig& config() const { return config_; }

  bool done() const { return done_; }
  StepIndex step_index() const { return step_; }
  std::size_t episode_length() const { return window_.size(); }
  const trace::Request& current_request() const;
  // Requested items after the current step, in order.
  std::span<const ItemId> future() const;
  std::span<const trace::Request> window() const { return window_; }
  const CacheState& cache() const { return cache_; }
  const Observation& observation() const { return observation_; }
  const metrics::Counters& counters() const { return counters_; }
  const std::vector<StepOutcome>& log() const { return log_; }

 private:
  Observation encode() const;
  void evict(ItemId victim);

  std::vector<double> latencies_;
  EnvConfig config_;
  std::vector<trace::Request> window_;
  std::vector<ItemId> items_;
  CacheState cache_;
  StepIndex step_ = 0;
  std::uint64_t clock_ = 0;
  bool done_ = true;
  Observation observation_;
  metrics::Counters counters_;
  std::vector<StepOutcome> log_;
};

// CSV `step,item_requested,hit,action,reward,sent,evicted`.
void write_episode_log(std::ostream& out, std::span<const StepOutcome> log);

// Builds requests one second apart from a list of item ids.
std::vector<trace::Request> make_requests(std::span<const ItemId> items,
                                          std::int64_t start_timestamp = 1,
                                          std::int64_t spacing = 1);

}  // namespace deepref::env
