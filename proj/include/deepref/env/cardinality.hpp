#pragma once

#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace deepref::env {

using BigInt = boost::multiprecision::cpp_int;

struct SpaceCardinalities {
  // C(M, C_e): distinct cache configurations.
  BigInt states;
  // M + 1: prefetch any item or do nothing.
  std::uint64_t actions = 0;
  BigInt product;
};

BigInt binomial(std::uint64_t n, std::uint64_t k);

// Throws unless M >= C_e >= 1.
SpaceCardinalities space_cardinalities(std::uint64_t num_items, std::uint64_t capacity);

}  // namespace deepref::env
