#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "deepref/types.hpp"

namespace deepref::env {

struct CacheEntry {
  ItemId item_id = 0;
  // Recency stamp; larger is more recent. The environment stamps entries from
  // a per-episode touch counter so a hit and an insertion in the same step are
  // ordered by effect order.
  std::uint64_t last_access = 0;
  // Step at which the timeliness timer last (re)started.
  StepIndex timer_start = 0;
  // Residency has received at least one hit.
  bool used = false;
};

// Edge storage: at most `capacity` unit-size items, unique ids.
class CacheState {
 public:
  explicit CacheState(std::size_t capacity = 1) : capacity_(capacity) {}

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool full() const { return entries_.size() >= capacity_; }
  bool contains(ItemId item) const { return find(item) != nullptr; }

  const CacheEntry* find(ItemId item) const;
  CacheEntry* find(ItemId item);
  std::span<const CacheEntry> entries() const { return entries_; }

  // Throws when full or when the item is already resident.
  void insert(const CacheEntry& entry);
  // Returns the removed entry; throws when absent.
  CacheEntry erase(ItemId item);
  void clear() { entries_.clear(); }

 private:
  std::size_t capacity_;
  std::vector<CacheEntry> entries_;
};

// Least recently used resident; ties go to the smaller item id. Throws unless
// the cache is full.
ItemId lru_choose_victim(const CacheState& cache);

// Resident whose next occurrence in `future` is furthest away; residents that
// never occur again win, ties go to the smaller item id. Throws unless the
// cache is full.
ItemId belady_choose_victim(const CacheState& cache, std::span<const ItemId> future);

}  // namespace deepref::env
