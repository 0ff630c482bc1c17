// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include "checks.hpp"
#include "json.hpp"
#include "nn_checks.hpp"
#include "support.hpp"

#include "deepref/agents/agents.hpp"
#include "deepref/baselines/baselines.hpp"
#include "deepref/env/cardinality.hpp"
#include "deepref/harness/commands.hpp"
#include "deepref/harness/config.hpp"
#include "deepref/metrics/metrics.hpp"

using namespace deepref;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

fs::path work_root() {
  const auto d = fs::temp_directory_path() / "deepref_acceptance";
  fs::create_directories(d);
  return d;
}

// Every results.json written anywhere under the work root is re-checked at
// the end (criterion 9).
std::vector<metrics::MetricsReport> g_reports;

// ---------------------------------------------------------------------------

Verdict reward_conformance() {
  int checked = 0;
  for (bool hit : {true, false}) {
    for (double l : {0.0, 0.25, 1.0}) {
      for (bool pf : {true, false}) {
        env::EnvConfig cfg;
        cfg.capacity = 2;
        env::PrefetchEnv e({l, l, l}, cfg);
        const std::vector<ItemId> items{0, 0};
        e.reset(env::make_requests(items));
        // Arrange the hit: prefetch item 0 at step 0, request it at step 1.
        e.step(hit ? env::prefetch(0) : env::prefetch(2));
        const auto r = e.step(pf ? env::prefetch(1) : env::no_prefetch(3)).outcome;
        const double expected = hit ? (pf ? 2.0 - l : 2.0) : (pf ? -1.0 - l : -1.0);
        if (r.hit != hit || r.reward != expected) {
          return {false, "hit=" + std::to_string(hit) + " l=" + fmt("%.2f", l) + " got " + fmt("%.4f", r.reward)};
        }
        ++checked;
      }
    }
  }
  return {true, std::to_string(checked) + " combinations exact"};
}

Verdict cardinalities() {
  const auto c = env::space_cardinalities(1682, 100);
  const auto oracle = testsupport::binomial_decimal(1682, 100);
  const bool ok = c.states.str() == oracle && c.actions == 1683 && c.product == c.states * 1683;
  return {ok, "|S| has " + std::to_string(oracle.size()) + " digits, |A| = " + std::to_string(c.actions)};
}

Verdict gradient_suite() {
  const auto d = checks::feedforward_sweep(50, 1001);
  const auto r = checks::recurrent_sweep(50, 2002);
  const bool ok = d.worst < 1e-4 && r.worst < 1e-4 && d.draws == 50 && r.draws == 50;
  return {ok, "dense max rel err " + fmt("%.2e", d.worst) + ", lstm max rel err " + fmt("%.2e", r.worst) + " over " +
                  std::to_string(d.coordinates + r.coordinates) + " coordinates"};
}

Verdict eviction_oracles() {
  const auto lru = checks::lru_sweep(1000, 4242);
  if (!lru.ok) return {false, "lru: " + lru.detail};
  const auto bel = checks::belady_exhaustive(12, 2);
  if (!bel.ok) return {false, "belady: " + bel.detail};
  return {true, std::to_string(lru.cases) + " lru traces, " + std::to_string(bel.cases) + " belady traces"};
}

// ---------------------------------------------------------------------------
// Data-backed criteria share one prepared dataset.

struct Prepared {
  harness::ExperimentConfig config;
  harness::Layout layout;
  trace::Catalog catalog;
  std::vector<trace::Request> train, test;
};

std::optional<Prepared> g_prepared;

Prepared& prepared() {
  if (g_prepared) return *g_prepared;
  Prepared p;
  p.config = harness::default_config();
  p.config.data_dir = testsupport::data_dir().string();
  p.config.output_dir = (work_root() / "base").string();
  p.layout = harness::Layout{p.config.output_dir};
  harness::cmd_prepare(p.config, {});
  p.catalog = trace::read_catalog_csv(p.layout.catalog());
  p.train = trace::read_trace_csv(p.layout.train_trace(p.config.train_edge));
  p.test = trace::read_trace_csv(p.layout.test_trace(p.config.train_edge));
  g_prepared = std::move(p);
  return *g_prepared;
}

// Prefetches one item absent from the window at step 0 and nothing after:
// its single residency sits untouched for the whole episode.
class IdleResidentPolicy : public env::Policy {
 public:
  std::string name() const override { return "idle-resident"; }
  env::Action act(const env::PrefetchEnv& e, const env::Observation&) override {
    if (e.step_index() != 0) return env::no_prefetch(e.num_items());
    std::vector<bool> seen(e.num_items(), false);
    for (const auto& r : e.window()) seen[r.item_id] = true;
    for (ItemId i = 0; i < e.num_items(); ++i) {
      if (!seen[i]) return env::prefetch(i);
    }
    return env::no_prefetch(e.num_items());
  }
};

class NeverPolicy : public env::Policy {
 public:
  std::string name() const override { return "never"; }
  env::Action act(const env::PrefetchEnv& e, const env::Observation&) override {
    return env::no_prefetch(e.num_items());
  }
};

Verdict baseline_anchors() {
  if (!testsupport::have_movielens()) return {false, "ml-100k data not found under " + testsupport::data_dir().string()};
  auto& p = prepared();
  const std::size_t T = p.config.episode_length;
  std::string detail;

  // Top-k aggressiveness on every episode.
  for (std::size_t cap : {10u, 50u, 100u}) {
    auto pop = baselines::make_topk_popularity(p.train, p.catalog.size(), cap);
    auto size = baselines::make_topk_size(p.catalog, cap);
    for (auto* policy : {pop.get(), size.get()}) {
      env::EnvConfig cfg;
      cfg.capacity = cap;
      const auto ev = harness::evaluate(*policy, p.catalog, cfg, p.test, T);
      g_reports.push_back(ev.report);
      for (const auto& c : ev.episodes) {
        if (c.sent_prefetches * T != cap * c.requests()) {
          return {false, policy->name() + " EC=" + std::to_string(cap) + " episode aggressiveness " +
                             fmt("%.4f", metrics::aggressiveness(c))};
        }
      }
    }
  }
  detail += "top-k aggressiveness = EC/200 on every episode";

  // Belady oracle on the test split.
  for (std::size_t cap : {10u, 50u, 100u}) {
    baselines::BeladyPrefetchPolicy belady;
    env::EnvConfig cfg;
    cfg.capacity = cap;
    const auto ev = harness::evaluate(belady, p.catalog, cfg, p.test, T);
    g_reports.push_back(ev.report);
    if (ev.report.accuracy < 0.95 || ev.report.coverage < 0.95) {
      return {false, "belady EC=" + std::to_string(cap) + " acc " + fmt("%.4f", ev.report.accuracy) + " cov " +
                         fmt("%.4f", ev.report.coverage)};
    }
    if (cap == 100) {
      detail += "; belady EC=100 acc " + fmt("%.4f", ev.report.accuracy) + " cov " + fmt("%.4f", ev.report.coverage);
    }
  }

  // Untouched residency: timeliness 200 +- 0.
  {
    IdleResidentPolicy idle;
    env::EnvConfig cfg;
    cfg.capacity = 10;
    const auto ev = harness::evaluate(idle, p.catalog, cfg, p.test, T);
    g_reports.push_back(ev.report);
    if (ev.report.totals.hits != 0 || !ev.report.timeliness || ev.report.timeliness->mean != 200.0 ||
        ev.report.timeliness->stddev != 0.0) {
      return {false, "idle residency timeliness not 200±0"};
    }
    NeverPolicy never;
    const auto nv = harness::evaluate(never, p.catalog, cfg, p.test, T);
    g_reports.push_back(nv.report);
    if (nv.report.timeliness.has_value()) return {false, "never-prefetch policy produced residencies"};
    detail += "; untouched residency timeliness " + fmt("%.1f", ev.report.timeliness->mean) + "±" +
              fmt("%.1f", ev.report.timeliness->stddev);
  }
  return {true, detail};
}

// ---------------------------------------------------------------------------

Verdict learning_sanity() {
  const std::size_t M = 10, T = 50;
  std::vector<ItemId> items;
  for (std::size_t i = 0; i < T * 40; ++i) items.push_back(static_cast<ItemId>(i % M));
  const auto trace = env::make_requests(items);
  const auto eval_windows = harness::episode_windows(std::span(trace).first(T * 20), T);
  const std::vector<double> lat(M, 0.5);

  auto greedy_accuracy = [&](env::Policy& policy) {
    env::EnvConfig cfg;
    cfg.capacity = 2;
    policy.configure(cfg);
    env::PrefetchEnv e(lat, cfg);
    metrics::Counters total;
    std::vector<metrics::Counters> eps;
    for (auto w : eval_windows) {
      const auto c = agents::run_episode(e, policy, w, false).counters;
      eps.push_back(c);
    }
    const auto r = metrics::aggregate(eps);
    g_reports.push_back(r);
    return r.accuracy;
  };
  auto train = [&](agents::AgentKind kind, agents::AgentConfig cfg, std::int64_t episodes) {
    auto agent = agents::make_agent(kind, M, cfg);
    env::EnvConfig ec;
    ec.capacity = 2;
    agent->configure(ec);
    env::PrefetchEnv e(lat, ec);
    agents::train_agent(*agent, e, trace, T, episodes);
    return agent;
  };

  baselines::RandomPolicy random(7);
  const double random_acc = greedy_accuracy(random);

  agents::AgentConfig drqn_cfg;
  drqn_cfg.hidden_size = 32;
  drqn_cfg.learning_rate = 3e-3;
  drqn_cfg.drqn_updates_per_episode = 4;
  drqn_cfg.target_update_period = 500;
  // The epsilon schedule spans half the 5000-episode budget; greedy accuracy
  // is checked every 500 episodes and training stops at the first pass.
  drqn_cfg.epsilon_decay_episodes = 2500;
  auto drqn = agents::make_agent(agents::AgentKind::kDrqn, M, drqn_cfg);
  double drqn_acc = 0.0;
  std::int64_t used = 0;
  {
    env::EnvConfig ec;
    ec.capacity = 2;
    drqn->configure(ec);
    env::PrefetchEnv e(lat, ec);
    agents::EpsilonSchedule schedule{drqn_cfg.epsilon_start, drqn_cfg.epsilon_end, 2500};
    std::mt19937_64 window_rng(drqn_cfg.seed * 2654435761ULL + 17);
    std::uniform_int_distribution<std::size_t> offset(0, trace.size() - T);
    for (std::int64_t ep = 0; ep < 5000; ++ep) {
      drqn->set_epsilon(schedule.value(ep));
      agents::run_episode(e, *drqn, std::span(trace).subspan(offset(window_rng), T), true,
                          [&](const agents::Transition& t) { drqn->observe(t); });
      drqn->end_episode();
      used = ep + 1;
      if (used % 500 == 0) {
        drqn_acc = greedy_accuracy(*drqn);
        if (drqn_acc >= 0.7) break;
      }
    }
  }

  agents::AgentConfig dqn_cfg;
  dqn_cfg.hidden_size = 32;
  dqn_cfg.learning_rate = 1e-3;
  dqn_cfg.target_update_period = 500;
  dqn_cfg.dqn_buffer_capacity = 5000;
  auto dqn = train(agents::AgentKind::kDqn, dqn_cfg, 1000);
  const double dqn_acc = greedy_accuracy(*dqn);

  const bool ok = drqn_acc >= 0.7 && random_acc <= 0.25 + 0.05 && dqn_acc >= 2.0 * random_acc;
  return {ok, "drqn " + fmt("%.3f", drqn_acc) + " after " + std::to_string(used) + " episodes, dqn " +
                  fmt("%.3f", dqn_acc) + ", random " + fmt("%.3f", random_acc)};
}

// ---------------------------------------------------------------------------
// Desk-scale reproduction settings.

constexpr int kDeskCapacity = 100;
const std::vector<std::uint64_t> kDeskSeeds = {1, 2, 3};

harness::ExperimentConfig desk_config(const fs::path& out) {
  auto c = harness::default_config();
  c.data_dir = testsupport::data_dir().string();
  c.output_dir = out.string();
  c.capacities = {kDeskCapacity};
  c.seeds = kDeskSeeds;
  c.train_episodes = 2000;
  c.policies = {"pop-recent", "pop-all", "drqn"};
  c.agent.hidden_size = 64;
  c.agent.learning_rate = 1e-3;
  return c;
}

std::map<std::string, std::vector<metrics::ParsedRow>> read_rows(const fs::path& root, const std::string& sub) {
  std::map<std::string, std::vector<metrics::ParsedRow>> out;
  for (const auto& entry : fs::recursive_directory_iterator(root / sub)) {
    if (entry.path().filename() != "results.csv") continue;
    std::ifstream in(entry.path());
    for (auto& r : metrics::read_results_csv(in, entry.path().string())) out[r.policy].push_back(r);
  }
  return out;
}

std::pair<double, double> mean_acc_cov(const std::vector<metrics::ParsedRow>& rows) {
  double a = 0.0, c = 0.0;
  for (const auto& r : rows) {
    a += r.accuracy;
    c += r.coverage;
  }
  return {a / static_cast<double>(rows.size()), c / static_cast<double>(rows.size())};
}

Verdict directional_reproduction() {
  if (!testsupport::have_movielens()) return {false, "ml-100k data not found"};
  const auto root = work_root() / "desk";
  fs::remove_all(root);
  const auto cfg = desk_config(root);
  harness::cmd_prepare(cfg, {});
  harness::cmd_train(cfg, {});
  harness::cmd_eval(cfg, {});
  harness::cmd_transfer(cfg, {});
  harness::cmd_report(cfg, {});

  std::string detail;
  bool ok = true;
  for (const char* sub : {"eval", "transfer"}) {
    const auto rows = read_rows(root, sub);
    const auto [d_acc, d_cov] = mean_acc_cov(rows.at("drqn"));
    const auto [r_acc, r_cov] = mean_acc_cov(rows.at("pop-recent"));
    const auto [a_acc, a_cov] = mean_acc_cov(rows.at("pop-all"));
    const bool part = d_acc > r_acc && d_acc > a_acc && d_cov > r_cov && d_cov > a_cov;
    ok = ok && part;
    if (!detail.empty()) detail += "; ";
    detail += std::string(sub) + (part ? " ok" : " FAILS") + ": drqn acc/cov " + fmt("%.4f", d_acc) + "/" +
              fmt("%.4f", d_cov) + " vs pop-recent " + fmt("%.4f", r_acc) + "/" + fmt("%.4f", r_cov) +
              " vs pop-all " + fmt("%.4f", a_acc) + "/" + fmt("%.4f", a_cov);
  }
  return {ok, detail};
}

Verdict determinism() {
  if (!testsupport::have_movielens()) return {false, "ml-100k data not found"};
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    const auto root = work_root() / ("determinism" + std::to_string(run));
    fs::remove_all(root);
    auto cfg = harness::default_config();
    cfg.data_dir = testsupport::data_dir().string();
    cfg.output_dir = root.string();
    cfg.capacities = {50};
    cfg.train_episodes = 500;
    cfg.seeds = {11};
    cfg.policies = {"topk-pop", "pop-recent", "random", "drqn"};
    cfg.agent.hidden_size = 64;
    harness::cmd_prepare(cfg, {});
    harness::cmd_train(cfg, {});
    harness::cmd_eval(cfg, {});
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root / "eval")) {
      if (entry.path().filename() != "results.csv") continue;
      std::ifstream in(entry.path(), std::ios::binary);
      std::ostringstream s;
      s << in.rdbuf();
      files[fs::relative(entry.path(), root).string()] = s.str();
    }
    runs.push_back(std::move(files));
  }
  if (runs[0].empty()) return {false, "no result files"};
  if (runs[0] != runs[1]) return {false, "result CSVs differ between runs"};
  return {true, std::to_string(runs[0].size()) + " result CSVs bit-identical"};
}

Verdict metric_identities() {
  std::size_t files = 0, rows = 0;
  for (const auto& entry : fs::recursive_directory_iterator(work_root())) {
    if (entry.path().filename() != "results.json") continue;
    ++files;
    std::ifstream in(entry.path());
    const auto j = nlohmann::json::parse(in);
    for (const auto& row : j) {
      ++rows;
      const auto hits = row.at("hits").get<std::uint64_t>();
      const auto requests = hits + row.at("misses").get<std::uint64_t>();
      const auto sent = row.at("sent_prefetches").get<std::uint64_t>();
      const auto used = row.at("used_prefetches").get<std::uint64_t>();
      const double acc = row.at("accuracy").get<double>();
      const double cov = row.at("coverage").get<double>();
      const double aggr = row.at("aggressiveness").get<double>();
      // The stored ratio must be the correctly rounded quotient of the counts.
      const bool ok = acc == static_cast<double>(hits) / static_cast<double>(requests) &&
                      aggr == static_cast<double>(sent) / static_cast<double>(requests) &&
                      (sent == 0 ? cov == 0.0 : cov == static_cast<double>(used) / static_cast<double>(sent)) &&
                      std::llround(acc * static_cast<double>(requests)) == static_cast<long long>(hits) &&
                      std::llround(aggr * static_cast<double>(requests)) == static_cast<long long>(sent) &&
                      (sent == 0 || std::llround(cov * static_cast<double>(sent)) == static_cast<long long>(used));
      if (!ok) return {false, "identity broken in " + entry.path().string()};
    }
  }
  for (const auto& r : g_reports) {
    if (auto broken = metrics::check_identities(r)) return {false, "in-memory report: " + *broken};
  }
  if (files == 0) return {false, "no results.json produced by the other criteria"};
  return {true, std::to_string(rows) + " rows in " + std::to_string(files) + " files, " +
                    std::to_string(g_reports.size()) + " in-memory reports"};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    double budget_seconds;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, 1.0, reward_conformance},   {2, 1.0, cardinalities},
      {3, 30.0, gradient_suite},      {4, 60.0, eviction_oracles},
      {5, 300.0, baseline_anchors},   {6, 1200.0, learning_sanity},
      {7, 7200.0, directional_reproduction}, {8, 1800.0, determinism},
      {9, 60.0, metric_identities},
  };
  // optional argv: run only the listed criterion ids
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  fs::remove_all(work_root());
  bool all = true;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      v.pass = false;
      v.detail += " (over the " + fmt("%.0f", c.budget_seconds) + " s budget)";
    }
    all = all && v.pass;
    std::printf("criterion %d: %s - %s [%.1f s]\n", c.id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
