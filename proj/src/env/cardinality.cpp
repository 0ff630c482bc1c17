#include "deepref/env/cardinality.hpp"

#include <algorithm>

#include "deepref/error.hpp"

namespace deepref::env {

BigInt binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt result = 1;
  // result stays integral: after step i it equals C(n - k + i, i).
  for (std::uint64_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;
  }
  return result;
}

SpaceCardinalities space_cardinalities(std::uint64_t num_items, std::uint64_t capacity) {
  if (capacity < 1) throw UsageError("cardinalities: capacity must be >= 1");
  if (capacity > num_items) throw UsageError("cardinalities: capacity exceeds catalog size");
  SpaceCardinalities out;
  out.states = binomial(num_items, capacity);
  out.actions = num_items + 1;
  out.product = out.states * out.actions;
  return out;
}

}  // namespace deepref::env
