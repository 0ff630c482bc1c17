#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deepref/env/policy.hpp"
#include "deepref/trace/trace_prep.hpp"

namespace deepref::baselines {

// Item ids in prefetch order plus the position of the next one to emit.
struct RankedList {
  std::vector<ItemId> items;
  std::size_t cursor = 0;
};

// Items by descending request count in `trace`; every catalog item appears,
// ties (including zero counts) by ascending id.
RankedList rank_by_popularity(std::span<const trace::Request> trace, std::size_t num_items);
// Items by descending size, ties by ascending id.
RankedList rank_by_size(const trace::Catalog& catalog);

// Request counts, optionally restricted to a trailing time window.
class PopularityTable {
 public:
  // window_seconds <= 0 keeps every request.
  PopularityTable(std::size_t num_items, std::int64_t window_seconds);

  void add(std::int64_t timestamp, ItemId item);
  // Most requested item, ties by smaller id; nullopt when empty.
  std::optional<ItemId> top() const;
  std::uint64_t count(ItemId item) const { return counts_.at(item); }
  std::size_t window_size() const { return window_.size(); }
  // Oldest timestamp still in the window.
  std::optional<std::int64_t> oldest() const;

 private:
  std::int64_t window_seconds_;
  std::vector<std::uint64_t> counts_;
  std::deque<std::pair<std::int64_t, ItemId>> window_;
};

// Clairvoyant oracle: on a miss fetches the requested item (serving it) and
// evicts with Belady; on a hit does nothing.
class BeladyPrefetchPolicy : public env::Policy {
 public:
  std::string name() const override { return "belady"; }
  void configure(env::EnvConfig& config) const override;
  env::Action act(const env::PrefetchEnv& env, const env::Observation& obs) override;
};

// Emits the first k ranked items, one per step over the first k steps of an
// episode, skipping already cached ones; then stops.
class TopKPolicy : public env::Policy {
 public:
  TopKPolicy(std::string name, RankedList ranked, std::size_t k);

  std::string name() const override { return name_; }
  void begin_episode(const env::PrefetchEnv& env) override;
  env::Action act(const env::PrefetchEnv& env, const env::Observation& obs) override;

 private:
  std::string name_;
  RankedList ranked_;
  std::size_t k_;
};

// Prefetches the most requested item of the trailing window (or of all
// requests seen so far) unless it is already cached. Counts persist across
// episodes of one evaluation run.
class PopularityPolicy : public env::Policy {
 public:
  static constexpr std::int64_t kDayWindow = 86400;

  PopularityPolicy(std::string name, std::size_t num_items, std::int64_t window_seconds);

  std::string name() const override { return name_; }
  env::Action act(const env::PrefetchEnv& env, const env::Observation& obs) override;
  const PopularityTable& table() const { return table_; }

 private:
  std::string name_;
  PopularityTable table_;
};

// Uniform over all M + 1 actions.
class RandomPolicy : public env::Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}

  std::string name() const override { return "random"; }
  env::Action act(const env::PrefetchEnv& env, const env::Observation& obs) override;

 private:
  std::mt19937_64 rng_;
};

std::unique_ptr<env::Policy> make_topk_popularity(std::span<const trace::Request> train_trace,
                                                  std::size_t num_items, std::size_t k);
std::unique_ptr<env::Policy> make_topk_size(const trace::Catalog& catalog, std::size_t k);
std::unique_ptr<env::Policy> make_popularity_recent(std::size_t num_items);
std::unique_ptr<env::Policy> make_popularity_all(std::size_t num_items);

}  // namespace deepref::baselines
