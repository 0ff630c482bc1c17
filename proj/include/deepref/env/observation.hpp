#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "deepref/env/cache.hpp"
#include "deepref/types.hpp"

namespace deepref::env {

enum class ObservationMode { kDqn, kDrqn };

// Binary observation vector stored by its set positions.
//
// DQN layout:  [request one-hot x H (oldest first, current last) | cache bits]
// DRQN layout: [current request one-hot | cache bits]
// Each block is M wide.
struct Observation {
  ObservationMode mode = ObservationMode::kDrqn;
  std::size_t num_items = 0;
  std::size_t history = 1;
  // Sorted ascending.
  std::vector<std::uint32_t> active;

  std::size_t dim() const { return history * num_items + num_items; }
  std::vector<double> dense() const;

  std::vector<std::uint8_t> request_onehot() const;
  std::vector<std::uint8_t> cache_indicator() const;

  friend bool operator==(const Observation&, const Observation&) = default;
};

std::size_t observation_dim(ObservationMode mode, std::size_t num_items, std::size_t history);

// `recent` holds requested items oldest first, the current request last. In
// DQN mode the last `history` entries are encoded and missing slots are zero.
Observation encode_observation(ObservationMode mode, std::span<const ItemId> recent,
                               const CacheState& cache, std::size_t num_items,
                               std::size_t history);

}  // namespace deepref::env
