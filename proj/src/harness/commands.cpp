#include "deepref/harness/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "deepref/baselines/baselines.hpp"
#include "deepref/error.hpp"
#include "json.hpp"

namespace deepref::harness {

namespace fs = std::filesystem;

namespace {

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string edge_dir(int edge) { return "edge" + std::to_string(edge); }

std::string cell_dir(const std::string& policy, int capacity, std::uint64_t seed) {
  return policy + "_cap" + std::to_string(capacity) + "_seed" + std::to_string(seed);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

Layout layout_for(const ExperimentConfig& config, const CommandOptions& opts) {
  return Layout{opts.out ? fs::path(*opts.out) : fs::path(config.output_dir)};
}

std::vector<std::uint64_t> seeds_for(const ExperimentConfig& config, const CommandOptions& opts) {
  if (opts.seed) return {*opts.seed};
  return config.seeds;
}

std::vector<int> capacities_for(const ExperimentConfig& config, const CommandOptions& opts) {
  if (opts.capacity) {
    if (*opts.capacity < 1) throw ConfigError("capacity must be >= 1");
    return {*opts.capacity};
  }
  return config.capacities;
}

void check_edge(const ExperimentConfig& config, int edge) {
  if (edge < 0 || edge >= config.edges) {
    throw ConfigError("edge " + std::to_string(edge) + " outside [0, " + std::to_string(config.edges) + ")");
  }
}

bool is_agent(const std::string& name) { return name == "dqn" || name == "drqn"; }

void check_policy(const std::string& name) {
  const auto& all = all_policies();
  if (std::find(all.begin(), all.end(), name) == all.end()) {
    throw ConfigError("unknown policy '" + name + "'");
  }
}

void check_capacity(int capacity, const trace::Catalog& catalog) {
  if (static_cast<std::size_t>(capacity) > catalog.size()) {
    throw ConfigError("capacity " + std::to_string(capacity) + " exceeds catalog size " +
                      std::to_string(catalog.size()));
  }
}

fs::path write_manifest(const fs::path& dir, RunManifest manifest, const std::vector<fs::path>& outputs) {
  for (const auto& p : outputs) manifest.outputs.push_back(p.filename().string());
  manifest.finished = now_utc();
  const auto path = dir / "manifest.json";
  write_text(path, manifest_json(manifest));
  return path;
}

RunManifest start_manifest(const std::string& command, const ExperimentConfig& config, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.config_hash = config_hash(config);
  m.seed = seed;
  m.code_version = code_version();
  m.started = now_utc();
  return m;
}

// Cluster labels renumbered by descending size (ties keep label order).
std::vector<int> relabel_by_size(const std::vector<int>& assignments, int k) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return sizes[static_cast<std::size_t>(a)] > sizes[static_cast<std::size_t>(b)];
  });
  std::vector<int> new_label(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) new_label[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;
  std::vector<int> out;
  out.reserve(assignments.size());
  for (int a : assignments) out.push_back(new_label[static_cast<std::size_t>(a)]);
  return out;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

metrics::ResultRow make_row(const std::string& policy, int edge, int capacity, const std::string& split,
                            const Evaluation& ev, std::uint64_t seed, std::optional<int> source) {
  metrics::ResultRow row;
  row.policy = policy;
  row.edge_id = edge;
  row.capacity = capacity;
  row.split = split;
  row.metrics = ev.report;
  row.episodes = ev.episodes.size();
  row.seed = seed;
  row.source_edge = source;
  return row;
}

std::vector<fs::path> write_results(const fs::path& dir, const metrics::ResultRow& row) {
  if (auto broken = metrics::check_identities(row.metrics)) {
    throw Error("metric identity violated for " + row.policy + ": " + *broken);
  }
  std::ostringstream csv;
  metrics::write_results_csv(csv, std::span(&row, 1));
  const auto csv_path = dir / "results.csv";
  const auto json_path = dir / "results.json";
  write_text(csv_path, csv.str());
  write_text(json_path, metrics::to_json(std::span(&row, 1)) + "\n");
  return {csv_path, json_path};
}

struct EdgeData {
  trace::Catalog catalog;
  std::vector<trace::Request> train;
  std::vector<trace::Request> test;
};

EdgeData load_edge(const Layout& layout, int edge) {
  EdgeData d;
  d.catalog = trace::read_catalog_csv(layout.catalog());
  d.train = trace::read_trace_csv(layout.train_trace(edge));
  d.test = trace::read_trace_csv(layout.test_trace(edge));
  return d;
}

}  // namespace

fs::path Layout::train_trace(int edge) const {
  return prepared() / ("edge_" + std::to_string(edge) + "_train.csv");
}
fs::path Layout::test_trace(int edge) const {
  return prepared() / ("edge_" + std::to_string(edge) + "_test.csv");
}
fs::path Layout::train_run(int edge, const std::string& agent, int capacity, std::uint64_t seed) const {
  return root / "train" / (edge_dir(edge) + "_" + cell_dir(agent, capacity, seed));
}
fs::path Layout::eval_run(int edge, const std::string& policy, int capacity, std::uint64_t seed) const {
  return root / "eval" / edge_dir(edge) / cell_dir(policy, capacity, seed);
}
fs::path Layout::transfer_run(int source, int target, const std::string& policy, int capacity,
                              std::uint64_t seed) const {
  return root / "transfer" / (edge_dir(source) + "_to_" + edge_dir(target)) / cell_dir(policy, capacity, seed);
}

std::string code_version() { return "deepref 0.1.0"; }

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  j["code_version"] = m.code_version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

std::vector<std::span<const trace::Request>> episode_windows(std::span<const trace::Request> trace,
                                                             std::size_t length) {
  if (length == 0) throw UsageError("episode length must be >= 1");
  std::vector<std::span<const trace::Request>> out;
  for (std::size_t start = 0; start + length <= trace.size(); start += length) {
    out.push_back(trace.subspan(start, length));
  }
  return out;
}

std::unique_ptr<env::Policy> make_policy(const std::string& name, const PolicyContext& ctx) {
  if (!ctx.catalog) throw UsageError("make_policy: no catalog");
  const std::size_t m = ctx.catalog->size();
  const auto k = static_cast<std::size_t>(ctx.capacity);
  if (name == "belady") return std::make_unique<baselines::BeladyPrefetchPolicy>();
  if (name == "topk-pop") return baselines::make_topk_popularity(ctx.ranking_trace, m, k);
  if (name == "topk-size") return baselines::make_topk_size(*ctx.catalog, k);
  if (name == "pop-recent") return baselines::make_popularity_recent(m);
  if (name == "pop-all") return baselines::make_popularity_all(m);
  if (name == "random") return std::make_unique<baselines::RandomPolicy>(ctx.seed);
  if (is_agent(name)) {
    if (!ctx.checkpoint) throw UsageError("make_policy: " + name + " needs a checkpoint");
    if (!fs::exists(*ctx.checkpoint)) throw DataError("missing checkpoint " + ctx.checkpoint->string());
    auto agent_cfg = ctx.agent;
    agent_cfg.seed = ctx.seed;
    return agents::load_agent(agents::parse_agent_kind(name), *ctx.checkpoint, m, agent_cfg);
  }
  throw ConfigError("unknown policy '" + name + "'");
}

Evaluation evaluate(env::Policy& policy, const trace::Catalog& catalog, env::EnvConfig env_config,
                    std::span<const trace::Request> trace, std::size_t episode_length) {
  const auto windows = episode_windows(trace, episode_length);
  if (windows.empty()) {
    throw DataError("trace of " + std::to_string(trace.size()) + " requests is shorter than one episode (" +
                    std::to_string(episode_length) + ")");
  }
  policy.configure(env_config);
  env::PrefetchEnv env(catalog.latencies(), env_config);
  Evaluation ev;
  for (const auto& w : windows) ev.episodes.push_back(agents::run_episode(env, policy, w, false).counters);
  ev.report = metrics::aggregate(ev.episodes);
  return ev;
}

std::vector<fs::path> cmd_prepare(const ExperimentConfig& base, const CommandOptions& opts) {
  auto config = base;
  if (opts.seed) config.data_seed = *opts.seed;
  config.validate();
  const auto layout = layout_for(config, opts);
  for (const auto& p : {config.ratings(), config.users(), config.geocode()}) {
    if (!fs::is_regular_file(p)) throw DataError("missing input " + p.string());
  }
  auto manifest = start_manifest("prepare", config, config.data_seed);

  const auto ratings = trace::parse_ratings(config.ratings());
  const auto users = trace::parse_users(config.users());
  const auto zips = trace::parse_zip_table(config.geocode());
  const auto geo = trace::geocode_users(users, zips);

  std::vector<trace::GeoPoint> points;
  for (const auto& u : geo.users) points.push_back({u.lat, u.lon});
  const auto km = trace::kmeans(points, config.edges, config.data_seed);
  const auto labels = relabel_by_size(km.assignments, config.edges);

  std::map<std::int64_t, EdgeId> assignment;
  for (std::size_t i = 0; i < geo.users.size(); ++i) assignment[geo.users[i].user_id] = labels[i];

  std::vector<trace::RawRating> retained;
  for (const auto& r : ratings) {
    if (assignment.count(r.user_id)) retained.push_back(r);
  }
  const auto item_ids = trace::distinct_items(ratings);
  const auto catalog = trace::build_catalog(item_ids, config.data_seed, config.size_min, config.size_max,
                                            trace::ThroughputModel{config.cwnd_bytes, config.rtt_seconds});
  const auto traces = trace::build_edge_traces(retained, assignment, catalog, config.edges);
  const auto split = trace::split_traces(traces, config.train_frac, config.transfer_edge);

  std::ostringstream sil;
  sil << "k,silhouette,wcss\n";
  for (int k = config.silhouette_k_min; k <= config.silhouette_k_max; ++k) {
    const auto r = trace::kmeans(points, k, config.data_seed);
    const double s = trace::silhouette_score(points, r.assignments);
    const double w = trace::within_cluster_ss(points, r.assignments, r.centroids);
    sil << k << "," << fmt("%.6f", s) << "," << fmt("%.6f", w) << "\n";
  }

  std::ostringstream assign_csv;
  assign_csv << "user_id,edge_id,lat,lon\n";
  for (std::size_t i = 0; i < geo.users.size(); ++i) {
    assign_csv << geo.users[i].user_id << "," << labels[i] << "," << fmt("%.6f", geo.users[i].lat) << ","
               << fmt("%.6f", geo.users[i].lon) << "\n";
  }

  fs::create_directories(layout.prepared());
  std::vector<fs::path> written;
  trace::write_catalog_csv(layout.catalog(), catalog);
  written.push_back(layout.catalog());
  for (int e = 0; e < config.edges; ++e) {
    const auto& es = split.edges[static_cast<std::size_t>(e)];
    trace::write_trace_csv(layout.train_trace(e), es.train);
    trace::write_trace_csv(layout.test_trace(e), es.test);
    written.push_back(layout.train_trace(e));
    written.push_back(layout.test_trace(e));
  }
  const auto sil_path = layout.prepared() / "silhouette.csv";
  write_text(sil_path, sil.str());
  written.push_back(sil_path);
  const auto assign_path = layout.prepared() / "assignments.csv";
  write_text(assign_path, assign_csv.str());
  written.push_back(assign_path);

  nlohmann::ordered_json summary;
  summary["ratings"] = ratings.size();
  summary["retained_ratings"] = retained.size();
  summary["users"] = users.size();
  summary["geocoded_users"] = geo.users.size();
  summary["unresolved_users"] = geo.unresolved;
  summary["items"] = catalog.size();
  summary["edges"] = config.edges;
  summary["transfer_edge"] = config.transfer_edge;
  auto& per_edge = summary["edge_requests"];
  for (int e = 0; e < config.edges; ++e) {
    const auto& es = split.edges[static_cast<std::size_t>(e)];
    per_edge.push_back({{"edge", e}, {"train", es.train.size()}, {"test", es.test.size()}});
  }
  const auto summary_path = layout.prepared() / "summary.json";
  write_text(summary_path, summary.dump(2) + "\n");
  written.push_back(summary_path);
  written.push_back(write_manifest(layout.prepared(), manifest, written));
  return written;
}

std::vector<fs::path> cmd_train(const ExperimentConfig& config, const CommandOptions& opts) {
  config.validate();
  const auto layout = layout_for(config, opts);
  const int edge = opts.edge.value_or(config.train_edge);
  check_edge(config, edge);
  std::vector<std::string> agent_names;
  if (opts.policy) {
    if (!is_agent(*opts.policy)) throw ConfigError("train: policy must be dqn or drqn");
    agent_names.push_back(*opts.policy);
  } else {
    for (const auto& p : config.policies) {
      if (is_agent(p)) agent_names.push_back(p);
    }
    if (agent_names.empty()) throw ConfigError("train: no learned policy in the policy list");
  }
  const auto data = load_edge(layout, edge);
  if (data.train.empty()) throw DataError("edge " + std::to_string(edge) + " has no training split");

  std::vector<fs::path> written;
  for (const auto& name : agent_names) {
    for (int capacity : capacities_for(config, opts)) {
      check_capacity(capacity, data.catalog);
      for (auto seed : seeds_for(config, opts)) {
        auto manifest = start_manifest("train", config, seed);
        auto agent_cfg = config.agent;
        agent_cfg.seed = seed;
        auto agent = agents::make_agent(agents::parse_agent_kind(name), data.catalog.size(), agent_cfg);
        env::EnvConfig ec;
        ec.capacity = static_cast<std::size_t>(capacity);
        agent->configure(ec);
        env::PrefetchEnv env(data.catalog.latencies(), ec);
        const auto curve = agents::train_agent(*agent, env, data.train, config.episode_length,
                                               config.train_episodes);
        const auto dir = layout.train_run(edge, name, capacity, seed);
        fs::create_directories(dir);
        std::vector<fs::path> outs{dir / "checkpoint.bin", dir / "curve.csv"};
        agent->save(outs[0]);
        std::ostringstream curve_csv;
        agents::write_curve_csv(curve_csv, curve);
        write_text(outs[1], curve_csv.str());
        outs.push_back(write_manifest(dir, manifest, outs));
        written.insert(written.end(), outs.begin(), outs.end());
      }
    }
  }
  return written;
}

std::vector<fs::path> cmd_eval(const ExperimentConfig& config, const CommandOptions& opts) {
  config.validate();
  const auto layout = layout_for(config, opts);
  const int edge = opts.edge.value_or(config.train_edge);
  check_edge(config, edge);
  std::vector<std::string> policies = config.policies;
  if (opts.policy) {
    check_policy(*opts.policy);
    policies = {*opts.policy};
  }
  const auto data = load_edge(layout, edge);

  std::vector<fs::path> written;
  for (const auto& name : policies) {
    for (int capacity : capacities_for(config, opts)) {
      check_capacity(capacity, data.catalog);
      for (auto seed : seeds_for(config, opts)) {
        auto manifest = start_manifest("eval", config, seed);
        PolicyContext ctx;
        ctx.catalog = &data.catalog;
        ctx.ranking_trace = data.train;
        ctx.capacity = capacity;
        ctx.seed = seed;
        ctx.agent = config.agent;
        if (is_agent(name)) ctx.checkpoint = layout.train_run(edge, name, capacity, seed) / "checkpoint.bin";
        auto policy = make_policy(name, ctx);
        env::EnvConfig ec;
        ec.capacity = static_cast<std::size_t>(capacity);
        const auto ev = evaluate(*policy, data.catalog, ec, data.test, config.episode_length);
        const auto dir = layout.eval_run(edge, name, capacity, seed);
        auto outs = write_results(dir, make_row(name, edge, capacity, "test", ev, seed, std::nullopt));
        outs.push_back(write_manifest(dir, manifest, outs));
        written.insert(written.end(), outs.begin(), outs.end());
      }
    }
  }
  return written;
}

std::vector<fs::path> cmd_transfer(const ExperimentConfig& config, const CommandOptions& opts) {
  config.validate();
  const auto layout = layout_for(config, opts);
  const int source = opts.edge.value_or(config.train_edge);
  const int target = opts.target_edge.value_or(config.transfer_edge);
  check_edge(config, source);
  check_edge(config, target);
  if (source == target) throw ConfigError("transfer: source and target edge are the same");
  std::vector<std::string> policies = config.policies;
  if (opts.policy) {
    check_policy(*opts.policy);
    policies = {*opts.policy};
  }
  const auto src = load_edge(layout, source);
  const auto dst = load_edge(layout, target);
  std::vector<trace::Request> full = dst.train;
  full.insert(full.end(), dst.test.begin(), dst.test.end());

  std::vector<fs::path> written;
  for (const auto& name : policies) {
    for (int capacity : capacities_for(config, opts)) {
      check_capacity(capacity, dst.catalog);
      for (auto seed : seeds_for(config, opts)) {
        auto manifest = start_manifest("transfer", config, seed);
        PolicyContext ctx;
        ctx.catalog = &dst.catalog;
        ctx.ranking_trace = src.train;
        ctx.capacity = capacity;
        ctx.seed = seed;
        ctx.agent = config.agent;
        if (is_agent(name)) ctx.checkpoint = layout.train_run(source, name, capacity, seed) / "checkpoint.bin";
        auto policy = make_policy(name, ctx);
        env::EnvConfig ec;
        ec.capacity = static_cast<std::size_t>(capacity);
        const auto ev = evaluate(*policy, dst.catalog, ec, full, config.episode_length);
        const auto dir = layout.transfer_run(source, target, name, capacity, seed);
        auto outs = write_results(dir, make_row(name, target, capacity, "transfer", ev, seed, source));
        outs.push_back(write_manifest(dir, manifest, outs));
        written.insert(written.end(), outs.begin(), outs.end());
      }
    }
  }
  return written;
}

ReportTable pivot(std::span<const metrics::ParsedRow> rows) {
  ReportTable table;
  std::set<int> caps;
  for (const auto& r : rows) caps.insert(r.capacity);
  table.capacities.assign(caps.begin(), caps.end());

  auto policy_rank = [](const std::string& name) {
    const auto& all = all_policies();
    return static_cast<std::size_t>(std::find(all.begin(), all.end(), name) - all.begin());
  };
  using Key = std::tuple<int, int, int, std::size_t, std::string>;
  struct Acc {
    ReportLine line;
    std::map<int, std::vector<const metrics::ParsedRow*>> by_cap;
  };
  std::map<Key, Acc> groups;
  for (const auto& r : rows) {
    const Key key{r.split == "test" ? 0 : 1, r.edge_id, r.source_edge.value_or(-1), policy_rank(r.policy),
                  r.policy};
    auto& g = groups[key];
    g.line.split = r.split;
    g.line.edge_id = r.edge_id;
    g.line.source_edge = r.source_edge;
    g.line.policy = r.policy;
    g.by_cap[r.capacity].push_back(&r);
  }
  for (auto& [_, g] : groups) {
    for (int cap : table.capacities) {
      const auto it = g.by_cap.find(cap);
      if (it == g.by_cap.end()) {
        g.line.cells.emplace_back();
        continue;
      }
      ReportCell cell;
      double tm = 0.0, ts = 0.0;
      std::size_t tn = 0;
      for (const auto* r : it->second) {
        cell.accuracy += r->accuracy;
        cell.coverage += r->coverage;
        cell.aggressiveness += r->aggressiveness;
        if (r->timeliness_mean) {
          tm += *r->timeliness_mean;
          ts += r->timeliness_std.value_or(0.0);
          ++tn;
        }
      }
      const double n = static_cast<double>(it->second.size());
      cell.accuracy /= n;
      cell.coverage /= n;
      cell.aggressiveness /= n;
      if (tn > 0) {
        cell.timeliness_mean = tm / static_cast<double>(tn);
        cell.timeliness_std = ts / static_cast<double>(tn);
      }
      cell.seeds = it->second.size();
      g.line.cells.push_back(cell);
    }
    table.lines.push_back(std::move(g.line));
  }
  return table;
}

namespace {

std::vector<std::string> cell_fields(const std::optional<ReportCell>& cell) {
  if (!cell) return {"-", "-", "-", "-"};
  std::string timeliness = "-";
  if (cell->timeliness_mean) {
    timeliness = fmt("%.1f", *cell->timeliness_mean) + "±" + fmt("%.1f", cell->timeliness_std.value_or(0.0));
  }
  return {fmt("%.4f", cell->accuracy), fmt("%.4f", cell->coverage), timeliness,
          fmt("%.4f", cell->aggressiveness)};
}

std::vector<std::string> line_prefix(const ReportLine& l) {
  return {l.split, std::to_string(l.edge_id), l.source_edge ? std::to_string(*l.source_edge) : "-", l.policy};
}

// UTF-8 aware width for the ± sign.
std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++w;
  }
  return w;
}

}  // namespace

std::string render_csv(const ReportTable& table) {
  std::ostringstream out;
  out << "split,edge_id,source_edge,policy";
  for (int c : table.capacities) {
    const auto s = std::to_string(c);
    out << ",acc_ec" << s << ",cov_ec" << s << ",timeliness_ec" << s << ",aggr_ec" << s;
  }
  out << "\n";
  for (const auto& l : table.lines) {
    auto fields = line_prefix(l);
    for (const auto& cell : l.cells) {
      const auto f = cell_fields(cell);
      fields.insert(fields.end(), f.begin(), f.end());
    }
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << "\n";
  }
  return out.str();
}

std::string render_text(const ReportTable& table) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> top = {"", "", "", ""};
  std::vector<std::string> head = {"split", "edge", "source", "policy"};
  for (int c : table.capacities) {
    top.insert(top.end(), {"EC=" + std::to_string(c), "", "", ""});
    head.insert(head.end(), {"Acc.", "Cov.", "Timeliness", "Aggr."});
  }
  grid.push_back(top);
  grid.push_back(head);
  for (const auto& l : table.lines) {
    auto row = line_prefix(l);
    for (const auto& cell : l.cells) {
      const auto f = cell_fields(cell);
      row.insert(row.end(), f.begin(), f.end());
    }
    grid.push_back(row);
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : grid) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], display_width(row[i]));
  }
  std::ostringstream out;
  for (const auto& row : grid) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += (i >= 4 && (i - 4) % 4 == 0) ? " | " : "  ";
      line += row[i] + std::string(width[i] - display_width(row[i]), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  }
  return out.str();
}

std::vector<fs::path> cmd_report(const ExperimentConfig& config, const CommandOptions& opts) {
  const auto layout = layout_for(config, opts);
  std::vector<fs::path> files;
  for (const char* sub : {"eval", "transfer"}) {
    const auto dir = layout.root / sub;
    if (!fs::exists(dir)) continue;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().filename() == "results.csv") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<metrics::ParsedRow> rows;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw DataError("cannot open " + f.string());
    auto part = metrics::read_results_csv(in, f.string());
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (rows.empty()) throw DataError("report: no result rows under " + layout.root.string());
  auto manifest = start_manifest("report", config, 0);
  const auto table = pivot(rows);
  const auto dir = layout.report();
  std::vector<fs::path> outs{dir / "table.csv", dir / "table.txt"};
  write_text(outs[0], render_csv(table));
  write_text(outs[1], render_text(table));
  outs.push_back(write_manifest(dir, manifest, outs));
  return outs;
}

}  // namespace deepref::harness
