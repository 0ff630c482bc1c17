#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "checks.hpp"
#include "deepref/env/cardinality.hpp"
#include "deepref/env/observation.hpp"
#include "deepref/env/prefetch_env.hpp"
#include "deepref/error.hpp"
#include "support.hpp"

using namespace deepref;
using namespace deepref::env;

namespace {

PrefetchEnv make_env(std::size_t m, std::size_t cap, double latency = 0.5) {
  EnvConfig cfg;
  cfg.capacity = cap;
  return PrefetchEnv(std::vector<double>(m, latency), cfg);
}

std::vector<trace::Request> reqs(std::initializer_list<ItemId> items) {
  const std::vector<ItemId> v(items);
  return make_requests(v);
}

}  // namespace

TEST(RewardTable, AllHitPrefetchCombinations) {
  for (double l : {0.0, 0.25, 1.0}) {
    EXPECT_EQ(reward_for(true, l), 2.0 - l);
    EXPECT_EQ(reward_for(false, l), -1.0 - l);
  }
  EXPECT_EQ(reward_for(true, std::nullopt), 2.0);
  EXPECT_EQ(reward_for(false, std::nullopt), -1.0);
  EXPECT_EQ(reward_for(false, 1.0), -2.0);
  EXPECT_EQ(reward_for(true, 0.25), 1.75);
}

TEST(RewardTable, ThroughEnvSteps) {
  for (double l : {0.0, 0.25, 1.0}) {
    // request 0 (miss), prefetch 0; request 0 (hit), prefetch 1.
    auto e = make_env(3, 2, l);
    e.reset(reqs({0, 0, 0, 2}));
    EXPECT_EQ(e.step(prefetch(0)).outcome.reward, -1.0 - l);
    EXPECT_EQ(e.step(prefetch(1)).outcome.reward, 2.0 - l);
    EXPECT_EQ(e.step(no_prefetch(3)).outcome.reward, 2.0);
    EXPECT_EQ(e.step(no_prefetch(3)).outcome.reward, -1.0);
  }
}

TEST(EnvSemantics, ResetGivesEmptyCache) {
  auto e = make_env(4, 2);
  const auto obs = e.reset(reqs({1, 2}));
  EXPECT_EQ(obs.cache_indicator(), std::vector<std::uint8_t>(4, 0));
  EXPECT_EQ(e.cache().size(), 0u);
}

TEST(EnvSemantics, PrefetchedItemHitsLater) {
  auto e = make_env(4, 2);
  e.reset(reqs({0, 3, 3}));
  EXPECT_FALSE(e.step(prefetch(3)).outcome.hit);
  EXPECT_TRUE(e.step(no_prefetch(4)).outcome.hit);
  EXPECT_TRUE(e.step(no_prefetch(4)).outcome.hit);
  // used counted once per residency
  EXPECT_EQ(e.counters().used_prefetches, 1u);
  EXPECT_EQ(e.counters().hits, 2u);
}

TEST(EnvSemantics, PrefetchOfRequestedItemDoesNotServeIt) {
  auto e = make_env(4, 2);
  e.reset(reqs({2, 2}));
  const auto r = e.step(prefetch(2));
  EXPECT_FALSE(r.outcome.hit);
  EXPECT_TRUE(e.cache().contains(2));
  EXPECT_TRUE(e.step(no_prefetch(4)).outcome.hit);
}

TEST(EnvSemantics, MissDoesNotCacheRequest) {
  auto e = make_env(4, 2);
  e.reset(reqs({1, 1, 1}));
  for (int i = 0; i < 3; ++i) EXPECT_FALSE(e.step(no_prefetch(4)).outcome.hit);
  EXPECT_EQ(e.cache().size(), 0u);
}

TEST(EnvSemantics, RedundantPrefetchCountsAndPays) {
  auto e = make_env(4, 2, 0.25);
  e.reset(reqs({0, 0, 0}));
  e.step(prefetch(3));
  const auto r = e.step(prefetch(3));
  EXPECT_TRUE(r.outcome.sent_prefetch);
  EXPECT_EQ(r.outcome.reward, -1.25);
  EXPECT_EQ(e.counters().sent_prefetches, 2u);
  EXPECT_EQ(e.cache().size(), 1u);
}

TEST(EnvSemantics, StepAfterDoneIsError) {
  auto e = make_env(2, 1);
  e.reset(reqs({0}));
  EXPECT_TRUE(e.step(no_prefetch(2)).outcome.done);
  EXPECT_THROW(e.step(no_prefetch(2)), UsageError);
}

TEST(EnvSemantics, BadInputsAreErrors) {
  EXPECT_THROW(make_env(3, 0), UsageError);
  auto e = make_env(3, 1);
  EXPECT_THROW(e.reset({}), UsageError);
  e.reset(reqs({0}));
  EXPECT_THROW(e.step(Action{4}), UsageError);
}

TEST(EnvSemantics, LruEvictsLeastRecent) {
  auto e = make_env(5, 2);
  e.reset(reqs({4, 0, 4, 4}));
  e.step(prefetch(0));                             // cache {0}
  e.step(prefetch(1));                             // hit 0, cache {0,1}, 0 touched before 1 inserted
  const auto r = e.step(prefetch(2));              // miss; evict 0
  EXPECT_EQ(r.outcome.evicted, std::optional<ItemId>(0));
}

TEST(Timeliness, InsertHitEvictSample) {
  // Item 1 inserted at step 5, hit at step 20, evicted at step 30: one sample of 10.
  std::vector<ItemId> items(40, 0);
  items[20] = 1;
  auto e = make_env(4, 1);
  e.reset(make_requests(items));
  for (int s = 0; s < 40; ++s) {
    Action a = no_prefetch(4);
    if (s == 5) a = prefetch(1);
    if (s == 30) a = prefetch(2);
    e.step(a);
  }
  const auto& samples = e.counters().timeliness_samples;
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[0], 10);
  EXPECT_EQ(samples[1], 40 - 30);
}

TEST(Timeliness, NeverPrefetchingGivesNoSamples) {
  auto e = make_env(3, 1);
  e.reset(reqs({0, 1, 2}));
  while (!e.done()) e.step(no_prefetch(3));
  EXPECT_TRUE(e.counters().timeliness_samples.empty());
}

TEST(Timeliness, InsertAtZeroNeverTouchedGivesHorizon) {
  std::vector<ItemId> items(200, 0);
  auto e = make_env(3, 1);
  e.reset(make_requests(items));
  e.step(prefetch(2));
  while (!e.done()) e.step(no_prefetch(3));
  ASSERT_EQ(e.counters().timeliness_samples.size(), 1u);
  EXPECT_EQ(e.counters().timeliness_samples[0], 200);
}

TEST(LruOracle, MatchesRecencyListReference) {
  const auto r = checks::lru_sweep(1000, 123);
  EXPECT_TRUE(r.ok) << r.detail;
  EXPECT_EQ(r.cases, 1000u);
}

TEST(BeladyOracle, VictimExamples) {
  CacheState c(2);
  c.insert({0, 1, 0, false});
  c.insert({1, 2, 0, false});
  const std::vector<ItemId> f1{0, 0, 1};
  EXPECT_EQ(belady_choose_victim(c, f1), 1u);
  const std::vector<ItemId> f2{0};
  EXPECT_EQ(belady_choose_victim(c, f2), 1u);
  EXPECT_EQ(belady_choose_victim(c, {}), 0u);
}

TEST(BeladyOracle, SetDpAgreesWithMaskDp) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::uint32_t> trace(static_cast<std::size_t>(rng() % 12 + 1));
    for (auto& i : trace) i = static_cast<std::uint32_t>(rng() % 4);
    testsupport::MaskFrontier f;
    for (auto i : trace) f = f.advance(i, 2);
    EXPECT_EQ(f.best(), testsupport::min_demand_misses(trace, 2));
  }
}

TEST(BeladyOracle, ExhaustiveShortTraces) {
  const auto r = checks::belady_exhaustive(8, 2);
  EXPECT_TRUE(r.ok) << r.detail;
  EXPECT_EQ(r.cases, 87380u);  // 4 + 4^2 + ... + 4^8
}

TEST(BeladyOracle, EnvPolicySendsOptimalFetches) {
  const auto r = checks::belady_env_sweep(7, 2);
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Observation, DrqnExample) {
  CacheState c(2);
  c.insert({0, 1, 0, false});
  const std::vector<ItemId> recent{2};
  const auto obs = encode_observation(ObservationMode::kDrqn, recent, c, 4, 4);
  EXPECT_EQ(obs.dense(), (std::vector<double>{0, 0, 1, 0, 1, 0, 0, 0}));
}

TEST(Observation, DqnExample) {
  CacheState c(1);
  const std::vector<ItemId> recent{1, 0};
  const auto obs = encode_observation(ObservationMode::kDqn, recent, c, 3, 2);
  EXPECT_EQ(obs.dense(), (std::vector<double>{0, 1, 0, 1, 0, 0, 0, 0, 0}));
}

TEST(Observation, DqnPaddingAtFirstStep) {
  EnvConfig cfg;
  cfg.capacity = 1;
  cfg.mode = ObservationMode::kDqn;
  cfg.history = 4;
  PrefetchEnv e(std::vector<double>(3, 0.5), cfg);
  const auto obs = e.reset(reqs({2, 1}));
  EXPECT_EQ(obs.dim(), 15u);
  EXPECT_EQ(obs.active, (std::vector<std::uint32_t>{11}));
}

TEST(ObservationProperty, CacheBitsMatchOccupancy) {
  std::mt19937_64 rng(3);
  auto e = make_env(8, 3);
  std::vector<ItemId> items(200);
  for (auto& i : items) i = static_cast<ItemId>(rng() % 8);
  auto obs = e.reset(make_requests(items));
  while (!e.done()) {
    const auto bits = obs.cache_indicator();
    EXPECT_EQ(std::accumulate(bits.begin(), bits.end(), 0u), e.cache().size());
    const auto one = obs.request_onehot();
    EXPECT_EQ(std::accumulate(one.begin(), one.end(), 0u), 1u);
    obs = e.step(Action{static_cast<std::uint32_t>(rng() % 9)}).observation;
  }
}

TEST(Cardinality, SmallExamples) {
  const auto a = space_cardinalities(6, 5);
  EXPECT_EQ(a.states, 6);
  EXPECT_EQ(a.actions, 7u);
  EXPECT_EQ(a.product, 42);
  const auto b = space_cardinalities(1, 1);
  EXPECT_EQ(b.states, 1);
  EXPECT_EQ(b.actions, 2u);
  EXPECT_EQ(space_cardinalities(11, 1).states, 11);
}

TEST(Cardinality, MovieLensScaleMatchesIndependentOracle) {
  const auto c = space_cardinalities(1682, 100);
  EXPECT_EQ(c.states.str(), testsupport::binomial_decimal(1682, 100));
  EXPECT_EQ(c.actions, 1683u);
  EXPECT_EQ(c.product, c.states * 1683);
}

TEST(CardinalityProperty, AgreesWithOracleOnGrid) {
  for (std::uint64_t m = 1; m <= 60; m += 7) {
    for (std::uint64_t k = 1; k <= m; k += 3) {
      EXPECT_EQ(space_cardinalities(m, k).states.str(), testsupport::binomial_decimal(m, k)) << m << "," << k;
    }
  }
}

TEST(Cardinality, CapacityAboveCatalogIsError) {
  EXPECT_THROW(space_cardinalities(3, 4), UsageError);
  EXPECT_THROW(space_cardinalities(3, 0), UsageError);
}

TEST(EpisodeLog, CsvHeaderAndRows) {
  EnvConfig cfg;
  cfg.capacity = 1;
  cfg.record_log = true;
  PrefetchEnv e(std::vector<double>(2, 0.5), cfg);
  e.reset(reqs({0, 1}));
  e.step(prefetch(1));
  e.step(no_prefetch(2));
  std::ostringstream out;
  write_episode_log(out, e.log());
  EXPECT_EQ(out.str(),
            "step,item_requested,hit,action,reward,sent,evicted\n"
            "0,0,0,1,-1.500000000,1,\n"
            "1,1,1,2,2.000000000,0,\n");
}
