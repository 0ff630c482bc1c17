#include "deepref/env/cache.hpp"

#include <algorithm>
#include <limits>

#include "deepref/error.hpp"

namespace deepref::env {

const CacheEntry* CacheState::find(ItemId item) const {
  for (const auto& e : entries_) {
    if (e.item_id == item) return &e;
  }
  return nullptr;
}

CacheEntry* CacheState::find(ItemId item) {
  for (auto& e : entries_) {
    if (e.item_id == item) return &e;
  }
  return nullptr;
}

void CacheState::insert(const CacheEntry& entry) {
  if (full()) throw UsageError("cache insert: cache is full");
  if (contains(entry.item_id)) throw UsageError("cache insert: item already resident");
  entries_.push_back(entry);
}

CacheEntry CacheState::erase(ItemId item) {
  const auto it = std::find_if(entries_.begin(), entries_.end(),
                               [item](const CacheEntry& e) { return e.item_id == item; });
  if (it == entries_.end()) throw UsageError("cache erase: item not resident");
  CacheEntry removed = *it;
  entries_.erase(it);
  return removed;
}

ItemId lru_choose_victim(const CacheState& cache) {
  if (!cache.full() || cache.size() == 0) throw UsageError("lru victim: cache is not full");
  const CacheEntry* victim = nullptr;
  for (const auto& e : cache.entries()) {
    if (victim == nullptr || e.last_access < victim->last_access ||
        (e.last_access == victim->last_access && e.item_id < victim->item_id)) {
      victim = &e;
    }
  }
  return victim->item_id;
}

ItemId belady_choose_victim(const CacheState& cache, std::span<const ItemId> future) {
  if (!cache.full() || cache.size() == 0) throw UsageError("belady victim: cache is not full");
  constexpr auto kNever = std::numeric_limits<std::size_t>::max();
  ItemId victim = 0;
  std::size_t victim_dist = 0;
  bool first = true;
  for (const auto& e : cache.entries()) {
    const auto it = std::find(future.begin(), future.end(), e.item_id);
    const std::size_t dist =
        it == future.end() ? kNever : static_cast<std::size_t>(it - future.begin());
    if (first || dist > victim_dist || (dist == victim_dist && e.item_id < victim)) {
      victim = e.item_id;
      victim_dist = dist;
      first = false;
    }
  }
  return victim;
}

}  // namespace deepref::env
