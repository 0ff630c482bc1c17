// Library-vs-oracle sweeps shared by the unit tests and the acceptance run.
#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "deepref/baselines/baselines.hpp"
#include "deepref/env/cache.hpp"
#include "deepref/env/prefetch_env.hpp"
#include "support.hpp"

namespace checks {

struct Outcome {
  bool ok = true;
  std::string detail;
  std::size_t cases = 0;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

// Random traces through the env with random actions, replayed on the
// recency-list reference; hit flags and victims must agree step by step.
inline Outcome lru_sweep(int traces, std::uint64_t seed) {
  using namespace deepref;
  Outcome out;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < traces && out.ok; ++t) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    const std::size_t cap = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(4, m))(rng);
    std::vector<ItemId> items(200);
    std::uniform_int_distribution<ItemId> pick(0, static_cast<ItemId>(m - 1));
    for (auto& i : items) i = pick(rng);
    env::EnvConfig cfg;
    cfg.capacity = cap;
    env::PrefetchEnv e(std::vector<double>(m, 0.5), cfg);
    e.reset(env::make_requests(items));

    testsupport::RecencyListCache ref{cap, {}};
    std::uniform_int_distribution<std::uint32_t> act(0, static_cast<std::uint32_t>(m));
    for (std::size_t s = 0; s < items.size(); ++s) {
      const std::uint32_t a = act(rng);
      const bool ref_hit = ref.contains(items[s]);
      if (ref_hit) ref.touch(items[s]);
      std::optional<std::uint32_t> ref_victim;
      if (a < m) {
        if (ref.contains(a)) {
          // redundant prefetch: no reinsertion, no recency change
        } else {
          ref_victim = ref.insert(a);
        }
      }
      const auto r = e.step(env::Action{a});
      if (r.outcome.hit != ref_hit || r.outcome.evicted != ref_victim) {
        std::ostringstream msg;
        msg << "trace " << t << " step " << s << ": env hit=" << r.outcome.hit << " ref hit=" << ref_hit;
        out.fail(msg.str());
        break;
      }
    }
    ++out.cases;
  }
  return out;
}

// Demand paging with Belady eviction through the library victim chooser.
inline int belady_demand_misses(const std::vector<deepref::ItemId>& trace, std::size_t capacity) {
  using namespace deepref;
  env::CacheState cache(capacity);
  int misses = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (cache.contains(trace[i])) continue;
    ++misses;
    if (cache.full()) {
      const auto future = std::span<const ItemId>(trace).subspan(i + 1);
      cache.erase(env::belady_choose_victim(cache, future));
    }
    cache.insert({trace[i], 0, 0, false});
  }
  return misses;
}

// Every trace of length 1..max_len over 4 items: Belady's miss count must
// equal the exhaustive minimum over eviction choices.
inline Outcome belady_exhaustive(std::size_t max_len, std::size_t capacity) {
  Outcome out;
  std::vector<deepref::ItemId> trace;
  std::vector<testsupport::MaskFrontier> frontier{testsupport::MaskFrontier{}};
  // Iterative DFS over the trace trie.
  std::vector<std::uint32_t> next_child{0};
  while (!next_child.empty() && out.ok) {
    if (next_child.back() == 4 || trace.size() == max_len) {
      next_child.pop_back();
      if (!trace.empty()) {
        trace.pop_back();
        frontier.pop_back();
      }
      continue;
    }
    const std::uint32_t item = next_child.back()++;
    trace.push_back(item);
    frontier.push_back(frontier.back().advance(item, capacity));
    next_child.push_back(0);
    const int best = frontier.back().best();
    const int got = belady_demand_misses(trace, capacity);
    ++out.cases;
    if (got != best) {
      std::ostringstream msg;
      msg << "trace";
      for (auto i : trace) msg << ' ' << i;
      msg << ": belady " << got << " misses, optimum " << best;
      out.fail(msg.str());
    }
  }
  return out;
}

// The oracle prefetch policy in the env must send exactly the optimal number
// of fetches and serve every request.
inline Outcome belady_env_sweep(std::size_t max_len, std::size_t capacity) {
  using namespace deepref;
  Outcome out;
  for (std::size_t len = 1; len <= max_len && out.ok; ++len) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < len; ++i) total *= 4;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<ItemId> trace(len);
      std::size_t c = code;
      for (auto& i : trace) {
        i = static_cast<ItemId>(c % 4);
        c /= 4;
      }
      baselines::BeladyPrefetchPolicy policy;
      env::EnvConfig cfg;
      cfg.capacity = capacity;
      policy.configure(cfg);
      env::PrefetchEnv e(std::vector<double>(4, 0.5), cfg);
      auto obs = e.reset(env::make_requests(trace));
      while (!e.done()) obs = e.step(policy.act(e, obs)).observation;
      const auto expected = static_cast<std::uint64_t>(testsupport::min_demand_misses(trace, capacity));
      ++out.cases;
      if (e.counters().sent_prefetches != expected || e.counters().misses != 0) {
        out.fail("env oracle disagrees on a length " + std::to_string(len) + " trace");
        break;
      }
    }
  }
  return out;
}

}  // namespace checks
