#include "deepref/env/observation.hpp"

#include <algorithm>

#include "deepref/error.hpp"

namespace deepref::env {

std::size_t observation_dim(ObservationMode mode, std::size_t num_items, std::size_t history) {
  const std::size_t blocks = mode == ObservationMode::kDqn ? history : 1;
  return blocks * num_items + num_items;
}

std::vector<double> Observation::dense() const {
  std::vector<double> out(dim(), 0.0);
  for (auto i : active) out[i] = 1.0;
  return out;
}

std::vector<std::uint8_t> Observation::request_onehot() const {
  std::vector<std::uint8_t> out(num_items, 0);
  const std::size_t begin = (history - 1) * num_items;
  for (auto i : active) {
    if (i >= begin && i < begin + num_items) out[i - begin] = 1;
  }
  return out;
}

std::vector<std::uint8_t> Observation::cache_indicator() const {
  std::vector<std::uint8_t> out(num_items, 0);
  const std::size_t begin = history * num_items;
  for (auto i : active) {
    if (i >= begin) out[i - begin] = 1;
  }
  return out;
}

Observation encode_observation(ObservationMode mode, std::span<const ItemId> recent,
                               const CacheState& cache, std::size_t num_items,
                               std::size_t history) {
  if (mode == ObservationMode::kDrqn) history = 1;
  if (history == 0) throw UsageError("observation: history must be >= 1");
  Observation obs;
  obs.mode = mode;
  obs.num_items = num_items;
  obs.history = history;

  const std::size_t take = std::min(history, recent.size());
  const std::size_t pad = history - take;
  for (std::size_t slot = 0; slot < take; ++slot) {
    const ItemId item = recent[recent.size() - take + slot];
    if (item >= num_items) throw UsageError("observation: item id out of range");
    obs.active.push_back(static_cast<std::uint32_t>((pad + slot) * num_items + item));
  }
  const std::size_t cache_begin = history * num_items;
  const std::size_t before = obs.active.size();
  for (const auto& e : cache.entries()) {
    obs.active.push_back(static_cast<std::uint32_t>(cache_begin + e.item_id));
  }
  std::sort(obs.active.begin() + static_cast<std::ptrdiff_t>(before), obs.active.end());
  return obs;
}

}  // namespace deepref::env
