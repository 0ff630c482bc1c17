// Test-only oracles, written independently of the library code they check.
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace testsupport {

inline std::filesystem::path data_dir() {
  if (const char* env = std::getenv("DEEPREF_DATA_DIR"); env && *env) return env;
  return DEEPREF_SOURCE_DATA_DIR;
}

inline bool have_movielens() {
  const auto d = data_dir();
  return std::filesystem::exists(d / "ml-100k" / "u.data") && std::filesystem::exists(d / "ml-100k" / "u.user") &&
         std::filesystem::exists(d / "zip_geo.csv");
}

// Decimal big integer, base 1e9 limbs, least significant first.
class Decimal {
 public:
  explicit Decimal(std::uint32_t v = 0) {
    if (v) limbs_.push_back(v);
  }

  void multiply(std::uint32_t f) {
    std::uint64_t carry = 0;
    for (auto& limb : limbs_) {
      const std::uint64_t cur = std::uint64_t{limb} * f + carry;
      limb = static_cast<std::uint32_t>(cur % kBase);
      carry = cur / kBase;
    }
    while (carry) {
      limbs_.push_back(static_cast<std::uint32_t>(carry % kBase));
      carry /= kBase;
    }
  }

  std::string str() const {
    if (limbs_.empty()) return "0";
    std::string out = std::to_string(limbs_.back());
    for (auto it = limbs_.rbegin() + 1; it != limbs_.rend(); ++it) {
      std::string part = std::to_string(*it);
      out += std::string(9 - part.size(), '0') + part;
    }
    return out;
  }

 private:
  static constexpr std::uint64_t kBase = 1000000000ULL;
  std::vector<std::uint32_t> limbs_;
};

// Exponent of prime p in n! (Legendre).
inline std::uint64_t legendre(std::uint64_t n, std::uint64_t p) {
  std::uint64_t e = 0;
  for (std::uint64_t q = p; q <= n; q *= p) {
    e += n / q;
    if (q > n / p) break;
  }
  return e;
}

// C(n, k) as a decimal string through its prime factorization.
inline std::string binomial_decimal(std::uint64_t n, std::uint64_t k) {
  if (k > n) return "0";
  std::vector<bool> composite(n + 1, false);
  Decimal result(1);
  for (std::uint64_t p = 2; p <= n; ++p) {
    if (composite[p]) continue;
    for (std::uint64_t q = p * p; q <= n; q += p) composite[q] = true;
    const auto e = legendre(n, p) - legendre(k, p) - legendre(n - k, p);
    for (std::uint64_t i = 0; i < e; ++i) result.multiply(static_cast<std::uint32_t>(p));
  }
  return result.str();
}

// LRU cache as an explicit recency list: front is most recent.
struct RecencyListCache {
  std::size_t capacity;
  std::list<std::uint32_t> order;

  bool contains(std::uint32_t item) const {
    return std::find(order.begin(), order.end(), item) != order.end();
  }
  void touch(std::uint32_t item) {
    order.remove(item);
    order.push_front(item);
  }
  // Returns the evicted item if any.
  std::optional<std::uint32_t> insert(std::uint32_t item) {
    std::optional<std::uint32_t> victim;
    if (order.size() == capacity) {
      victim = order.back();
      order.pop_back();
    }
    order.push_front(item);
    return victim;
  }
};

// Minimum number of demand misses over every eviction choice: dynamic
// programming over reachable cache contents.
inline int min_demand_misses(const std::vector<std::uint32_t>& trace, std::size_t capacity) {
  std::map<std::set<std::uint32_t>, int> frontier{{{}, 0}};
  for (auto item : trace) {
    std::map<std::set<std::uint32_t>, int> next;
    auto relax = [&](const std::set<std::uint32_t>& s, int cost) {
      auto it = next.find(s);
      if (it == next.end() || cost < it->second) next[s] = cost;
    };
    for (const auto& [cache, misses] : frontier) {
      if (cache.count(item)) {
        relax(cache, misses);
        continue;
      }
      if (cache.size() < capacity) {
        auto s = cache;
        s.insert(item);
        relax(s, misses + 1);
        continue;
      }
      for (auto victim : cache) {
        auto s = cache;
        s.erase(victim);
        s.insert(item);
        relax(s, misses + 1);
      }
    }
    frontier = std::move(next);
  }
  int best = static_cast<int>(trace.size()) + 1;
  for (const auto& [_, m] : frontier) best = std::min(best, m);
  return best;
}

// Same minimum as min_demand_misses for catalogs of at most 4 items, with
// cache contents as bit masks so it can be advanced one request at a time.
struct MaskFrontier {
  static constexpr int kUnreachable = 1 << 20;
  std::array<int, 16> cost;

  MaskFrontier() {
    cost.fill(kUnreachable);
    cost[0] = 0;
  }

  MaskFrontier advance(std::uint32_t item, std::size_t capacity) const {
    MaskFrontier next;
    next.cost.fill(kUnreachable);
    const unsigned bit = 1u << item;
    for (unsigned mask = 0; mask < 16; ++mask) {
      const int c = cost[mask];
      if (c == kUnreachable) continue;
      if (mask & bit) {
        next.cost[mask] = std::min(next.cost[mask], c);
      } else if (static_cast<std::size_t>(std::popcount(mask)) < capacity) {
        next.cost[mask | bit] = std::min(next.cost[mask | bit], c + 1);
      } else {
        for (unsigned v = 0; v < 4; ++v) {
          if (!(mask & (1u << v))) continue;
          const unsigned m2 = (mask & ~(1u << v)) | bit;
          next.cost[m2] = std::min(next.cost[m2], c + 1);
        }
      }
    }
    return next;
  }

  int best() const { return *std::min_element(cost.begin(), cost.end()); }
};

}  // namespace testsupport
