#include "deepref/env/prefetch_env.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "deepref/error.hpp"

namespace deepref::env {

double reward_for(bool hit, std::optional<double> prefetch_latency) {
  if (hit) return prefetch_latency ? 2.0 - *prefetch_latency : 2.0;
  return prefetch_latency ? -1.0 - *prefetch_latency : -1.0;
}

PrefetchEnv::PrefetchEnv(std::vector<double> latencies, EnvConfig config)
    : latencies_(std::move(latencies)), config_(config), cache_(config.capacity) {
  if (latencies_.empty()) throw UsageError("env: empty catalog");
  if (config_.capacity < 1) throw UsageError("env: capacity must be >= 1");
  if (config_.history < 1) throw UsageError("env: history must be >= 1");
  for (double l : latencies_) {
    if (!(l >= 0.0 && l <= 1.0)) throw UsageError("env: latencies must lie in [0,1]");
  }
}

Observation PrefetchEnv::reset(std::span<const trace::Request> window) {
  if (window.empty()) throw UsageError("env reset: empty trace window");
  window_.assign(window.begin(), window.end());
  items_.clear();
  items_.reserve(window_.size());
  for (const auto& r : window_) {
    if (r.item_id >= num_items()) throw UsageError("env reset: request item out of catalog");
    items_.push_back(r.item_id);
  }
  cache_ = CacheState(config_.capacity);
  step_ = 0;
  clock_ = 0;
  done_ = false;
  counters_ = {};
  log_.clear();
  observation_ = encode();
  return observation_;
}

const trace::Request& PrefetchEnv::current_request() const {
  if (window_.empty()) throw UsageError("env: not reset");
  return window_[static_cast<std::size_t>(std::min<StepIndex>(step_, window_.size() - 1))];
}

std::span<const ItemId> PrefetchEnv::future() const {
  const auto from = std::min<std::size_t>(static_cast<std::size_t>(step_) + 1, items_.size());
  return std::span<const ItemId>(items_).subspan(from);
}

Observation PrefetchEnv::encode() const {
  const auto cur = static_cast<std::size_t>(std::min<StepIndex>(step_, items_.size() - 1));
  const std::size_t history = config_.mode == ObservationMode::kDqn ? config_.history : 1;
  const std::size_t first = cur + 1 >= history ? cur + 1 - history : 0;
  const std::span<const ItemId> recent(items_.data() + first, cur + 1 - first);
  return encode_observation(config_.mode, recent, cache_, num_items(), config_.history);
}

void PrefetchEnv::evict(ItemId victim) {
  const CacheEntry removed = cache_.erase(victim);
  counters_.timeliness_samples.push_back(step_ - removed.timer_start);
}

StepResult PrefetchEnv::step(Action action) {
  if (done_) throw UsageError("env step: episode is done");
  if (action.index > num_items()) throw UsageError("env step: action out of range");

  StepOutcome out;
  out.step = step_;
  out.requested = items_[static_cast<std::size_t>(step_)];
  out.action = action;
  const bool prefetching = action.index < num_items();

  // Hit is decided against the cache as it stood before this step's action.
  bool hit = false;
  if (CacheEntry* entry = cache_.find(out.requested)) {
    hit = true;
    entry->last_access = ++clock_;
    entry->timer_start = step_;
    if (!entry->used) {
      entry->used = true;
      ++counters_.used_prefetches;
    }
  }

  if (prefetching) {
    const ItemId target = action.index;
    ++counters_.sent_prefetches;
    out.sent_prefetch = true;
    if (!cache_.contains(target)) {
      if (cache_.full()) {
        const ItemId victim = config_.eviction == Eviction::kBelady
                                  ? belady_choose_victim(cache_, future())
                                  : lru_choose_victim(cache_);
        evict(victim);
        out.evicted = victim;
      }
      CacheEntry entry{target, ++clock_, step_, false};
      if (config_.serve_on_fetch && !hit && target == out.requested) {
        hit = true;
        entry.used = true;
        ++counters_.used_prefetches;
      }
      cache_.insert(entry);
    }
  }

  out.hit = hit;
  out.reward = reward_for(hit, prefetching ? std::optional(latencies_[action.index]) : std::nullopt);
  if (hit) {
    ++counters_.hits;
  } else {
    ++counters_.misses;
  }

  ++step_;
  if (static_cast<std::size_t>(step_) == items_.size()) {
    done_ = true;
    const auto horizon = static_cast<StepIndex>(items_.size());
    for (const auto& e : cache_.entries()) counters_.timeliness_samples.push_back(horizon - e.timer_start);
  }
  out.done = done_;
  if (config_.record_log) log_.push_back(out);
  observation_ = encode();
  return {out, observation_};
}

void write_episode_log(std::ostream& out, std::span<const StepOutcome> log) {
  out << "step,item_requested,hit,action,reward,sent,evicted\n";
  char reward[32];
  for (const auto& s : log) {
    std::snprintf(reward, sizeof reward, "%.9f", s.reward);
    out << s.step << ',' << s.requested << ',' << (s.hit ? 1 : 0) << ',' << s.action.index << ','
        << reward << ',' << (s.sent_prefetch ? 1 : 0) << ',';
    if (s.evicted) out << *s.evicted;
    out << '\n';
  }
}

std::vector<trace::Request> make_requests(std::span<const ItemId> items,
                                          std::int64_t start_timestamp, std::int64_t spacing) {
  std::vector<trace::Request> out;
  out.reserve(items.size());
  std::int64_t ts = start_timestamp;
  for (ItemId item : items) {
    out.push_back({ts, 1, item, 0});
    ts += spacing;
  }
  return out;
}

}  // namespace deepref::env
