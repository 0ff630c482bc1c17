#include "deepref/baselines/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "deepref/error.hpp"

namespace deepref::baselines {

RankedList rank_by_popularity(std::span<const trace::Request> trace, std::size_t num_items) {
  std::vector<std::uint64_t> counts(num_items, 0);
  for (const auto& r : trace) {
    if (r.item_id >= num_items) throw UsageError("rank: item outside catalog");
    ++counts[r.item_id];
  }
  RankedList ranked;
  ranked.items.resize(num_items);
  std::iota(ranked.items.begin(), ranked.items.end(), ItemId{0});
  std::stable_sort(ranked.items.begin(), ranked.items.end(),
                   [&](ItemId a, ItemId b) { return counts[a] > counts[b]; });
  return ranked;
}

RankedList rank_by_size(const trace::Catalog& catalog) {
  RankedList ranked;
  ranked.items.resize(catalog.size());
  std::iota(ranked.items.begin(), ranked.items.end(), ItemId{0});
  std::stable_sort(ranked.items.begin(), ranked.items.end(), [&](ItemId a, ItemId b) {
    return catalog[a].size_units > catalog[b].size_units;
  });
  return ranked;
}

PopularityTable::PopularityTable(std::size_t num_items, std::int64_t window_seconds)
    : window_seconds_(window_seconds), counts_(num_items, 0) {}

void PopularityTable::add(std::int64_t timestamp, ItemId item) {
  ++counts_.at(item);
  if (window_seconds_ <= 0) return;
  window_.emplace_back(timestamp, item);
  while (!window_.empty() && timestamp - window_.front().first > window_seconds_) {
    --counts_[window_.front().second];
    window_.pop_front();
  }
}

std::optional<ItemId> PopularityTable::top() const {
  std::optional<ItemId> best;
  std::uint64_t best_count = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] > best_count) {
      best_count = counts_[i];
      best = static_cast<ItemId>(i);
    }
  }
  return best;
}

std::optional<std::int64_t> PopularityTable::oldest() const {
  if (window_.empty()) return std::nullopt;
  return window_.front().first;
}

void BeladyPrefetchPolicy::configure(env::EnvConfig& config) const {
  config.eviction = env::Eviction::kBelady;
  config.serve_on_fetch = true;
}

env::Action BeladyPrefetchPolicy::act(const env::PrefetchEnv& env, const env::Observation&) {
  const ItemId requested = env.current_request().item_id;
  if (env.cache().contains(requested)) return env::no_prefetch(env.num_items());
  return env::prefetch(requested);
}

TopKPolicy::TopKPolicy(std::string name, RankedList ranked, std::size_t k)
    : name_(std::move(name)), ranked_(std::move(ranked)), k_(k) {}

void TopKPolicy::begin_episode(const env::PrefetchEnv&) { ranked_.cursor = 0; }

env::Action TopKPolicy::act(const env::PrefetchEnv& env, const env::Observation&) {
  const auto step = static_cast<std::size_t>(env.step_index());
  if (step >= k_ || ranked_.cursor >= ranked_.items.size()) return env::no_prefetch(env.num_items());
  const ItemId item = ranked_.items[ranked_.cursor++];
  if (env.cache().contains(item)) return env::no_prefetch(env.num_items());
  return env::prefetch(item);
}

PopularityPolicy::PopularityPolicy(std::string name, std::size_t num_items,
                                   std::int64_t window_seconds)
    : name_(std::move(name)), table_(num_items, window_seconds) {}

env::Action PopularityPolicy::act(const env::PrefetchEnv& env, const env::Observation&) {
  const auto& request = env.current_request();
  table_.add(request.timestamp, request.item_id);
  const auto winner = table_.top();
  if (!winner || env.cache().contains(*winner)) return env::no_prefetch(env.num_items());
  return env::prefetch(*winner);
}

env::Action RandomPolicy::act(const env::PrefetchEnv& env, const env::Observation&) {
  std::uniform_int_distribution<std::uint32_t> dist(0, static_cast<std::uint32_t>(env.num_items()));
  return env::Action{dist(rng_)};
}

std::unique_ptr<env::Policy> make_topk_popularity(std::span<const trace::Request> train_trace,
                                                  std::size_t num_items, std::size_t k) {
  return std::make_unique<TopKPolicy>("topk-pop", rank_by_popularity(train_trace, num_items), k);
}

std::unique_ptr<env::Policy> make_topk_size(const trace::Catalog& catalog, std::size_t k) {
  return std::make_unique<TopKPolicy>("topk-size", rank_by_size(catalog), k);
}

std::unique_ptr<env::Policy> make_popularity_recent(std::size_t num_items) {
  return std::make_unique<PopularityPolicy>("pop-recent", num_items, PopularityPolicy::kDayWindow);
}

std::unique_ptr<env::Policy> make_popularity_all(std::size_t num_items) {
  return std::make_unique<PopularityPolicy>("pop-all", num_items, 0);
}

}  // namespace deepref::baselines
