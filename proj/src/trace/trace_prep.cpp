#include "deepref/trace/trace_prep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "deepref/error.hpp"

namespace deepref::trace {

namespace {

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

Catalog::Catalog(std::vector<ContentItem> items, std::vector<std::int64_t> raw_ids)
    : items_(std::move(items)), raw_ids_(std::move(raw_ids)) {
  if (items_.size() != raw_ids_.size()) throw UsageError("catalog: raw id count mismatch");
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].item_id != i) throw DataError("catalog: item ids must be 0..M-1 in order");
  }
  if (!std::is_sorted(raw_ids_.begin(), raw_ids_.end())) {
    throw DataError("catalog: raw ids must be ascending");
  }
}

std::optional<ItemId> Catalog::dense_id(std::int64_t raw_id) const {
  const auto it = std::lower_bound(raw_ids_.begin(), raw_ids_.end(), raw_id);
  if (it == raw_ids_.end() || *it != raw_id) return std::nullopt;
  return static_cast<ItemId>(it - raw_ids_.begin());
}

std::vector<double> Catalog::latencies() const {
  std::vector<double> out;
  out.reserve(items_.size());
  for (const auto& item : items_) out.push_back(item.latency_norm);
  return out;
}

std::vector<RawRating> parse_ratings(std::istream& in, const std::string& source) {
  std::vector<RawRating> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
    const auto fields = split(line, delim);
    if (fields.size() != 4) {
      throw ParseError(source, line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    }
    const auto user = parse_number<std::int64_t>(fields[0]);
    const auto item = parse_number<std::int64_t>(fields[1]);
    const auto rating = parse_number<int>(fields[2]);
    const auto ts = parse_number<std::int64_t>(fields[3]);
    if (!user || !item || !rating || !ts) throw ParseError(source, line_no, "non-integer field");
    if (*user <= 0 || *item <= 0) throw ParseError(source, line_no, "ids must be positive");
    if (*ts <= 0) throw ParseError(source, line_no, "timestamp must be positive");
    out.push_back({*user, *item, *rating, *ts});
  }
  if (out.empty()) throw DataError(source + ": no ratings");
  return out;
}

std::vector<RawRating> parse_ratings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_ratings(in, path.string());
}

std::vector<UserRecord> parse_users(std::istream& in, const std::string& source) {
  std::vector<UserRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, '|');
    if (fields.size() < 5) throw ParseError(source, line_no, "expected 5 '|'-separated fields");
    const auto user = parse_number<std::int64_t>(fields[0]);
    if (!user || *user <= 0) throw ParseError(source, line_no, "bad user id");
    out.push_back({*user, std::string(trim(fields[4]))});
  }
  if (out.empty()) throw DataError(source + ": no users");
  return out;
}

std::vector<UserRecord> parse_users(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_users(in, path.string());
}

ZipTable parse_zip_table(std::istream& in, const std::string& source) {
  ZipTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw ParseError(source, line_no, "expected zip,lat,lon");
    if (line_no == 1 && trim(fields[0]) == "zip") continue;
    const auto lat = parse_number<double>(fields[1]);
    const auto lon = parse_number<double>(fields[2]);
    if (!lat || !lon) throw ParseError(source, line_no, "bad coordinate");
    if (*lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
      throw ParseError(source, line_no, "coordinate out of range");
    }
    table[std::string(trim(fields[0]))] = {*lat, *lon};
  }
  return table;
}

ZipTable parse_zip_table(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_zip_table(in, path.string());
}

GeocodeResult geocode_users(std::span<const UserRecord> users, const ZipTable& zip_table) {
  if (zip_table.empty()) throw DataError("geocode: empty zip table");
  GeocodeResult result;
  for (const auto& user : users) {
    const auto it = zip_table.find(user.zip);
    if (it == zip_table.end()) {
      ++result.unresolved;
      continue;
    }
    result.users.push_back({user.user_id, user.zip, it->second.lat, it->second.lon});
  }
  return result;
}

double squared_distance(const GeoPoint& a, const GeoPoint& b) {
  const double dlat = a.lat - b.lat;
  const double dlon = a.lon - b.lon;
  return dlat * dlat + dlon * dlon;
}

double within_cluster_ss(std::span<const GeoPoint> points, std::span<const int> assignments,
                         std::span<const GeoPoint> centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += squared_distance(points[i], centroids[static_cast<std::size_t>(assignments[i])]);
  }
  return total;
}

namespace {

KMeansResult lloyd(std::span<const GeoPoint> points, std::span<const GeoPoint> distinct, int k,
                   std::mt19937_64& rng, int max_iterations) {
  std::vector<std::size_t> order(distinct.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  KMeansResult result;
  result.centroids.reserve(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) result.centroids.push_back(distinct[order[static_cast<std::size_t>(c)]]);
  result.assignments.assign(points.size(), -1);

  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = squared_distance(points[i], result.centroids[static_cast<std::size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (result.assignments[i] != best) {
        result.assignments[i] = best;
        changed = true;
      }
    }
    result.wcss_history.push_back(within_cluster_ss(points, result.assignments, result.centroids));
    result.iterations = iter + 1;
    if (!changed && iter > 0) break;

    std::vector<GeoPoint> sums(static_cast<std::size_t>(k));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = static_cast<std::size_t>(result.assignments[i]);
      sums[c].lat += points[i].lat;
      sums[c].lon += points[i].lon;
      ++counts[c];
    }
    // An emptied cluster keeps its previous centroid.
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (counts[c] == 0) continue;
      result.centroids[c] = {sums[c].lat / static_cast<double>(counts[c]),
                             sums[c].lon / static_cast<double>(counts[c])};
    }
  }
  return result;
}

}  // namespace

KMeansResult kmeans(std::span<const GeoPoint> points, int k, std::uint64_t seed,
                    int max_iterations, int restarts) {
  if (k < 1) throw UsageError("kmeans: k must be >= 1");

  std::vector<GeoPoint> distinct(points.begin(), points.end());
  std::sort(distinct.begin(), distinct.end(), [](const GeoPoint& a, const GeoPoint& b) {
    return a.lat != b.lat ? a.lat < b.lat : a.lon < b.lon;
  });
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (static_cast<std::size_t>(k) > distinct.size()) {
    throw UsageError("kmeans: k=" + std::to_string(k) + " exceeds " +
                     std::to_string(distinct.size()) + " distinct points");
  }

  std::mt19937_64 rng(seed);
  std::optional<KMeansResult> best;
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    auto run = lloyd(points, distinct, k, rng, max_iterations);
    if (!best || run.wcss_history.back() < best->wcss_history.back()) best = std::move(run);
  }
  return std::move(*best);
}

std::vector<double> silhouette_values(std::span<const GeoPoint> points,
                                      std::span<const int> assignments) {
  if (points.size() != assignments.size()) throw UsageError("silhouette: size mismatch");
  int k = 0;
  for (int a : assignments) {
    if (a < 0) throw UsageError("silhouette: negative cluster id");
    k = std::max(k, a + 1);
  }
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
  if (k < 2 || std::any_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s == 0; })) {
    throw UsageError("silhouette: needs at least 2 non-empty clusters");
  }

  std::vector<double> out(points.size(), 0.0);
  std::vector<double> sum_to(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::fill(sum_to.begin(), sum_to.end(), 0.0);
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (i == j) continue;
      sum_to[static_cast<std::size_t>(assignments[j])] +=
          std::sqrt(squared_distance(points[i], points[j]));
    }
    const auto own = static_cast<std::size_t>(assignments[i]);
    // Singleton clusters score 0 by convention.
    if (sizes[own] == 1) continue;
    const double a = sum_to[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sum_to.size(); ++c) {
      if (c == own) continue;
      b = std::min(b, sum_to[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    out[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return out;
}

double silhouette_score(std::span<const GeoPoint> points, std::span<const int> assignments) {
  const auto values = silhouette_values(points, assignments);
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

Catalog build_catalog(std::span<const std::int64_t> item_ids, std::uint64_t seed, double size_min,
                      double size_max, const ThroughputModel& model) {
  if (item_ids.empty()) throw DataError("catalog: empty item set");
  if (!(size_min > 0.0) || !(size_max > size_min)) {
    throw UsageError("catalog: require size_max > size_min > 0");
  }
  std::vector<std::int64_t> raw(item_ids.begin(), item_ids.end());
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> size_dist(size_min, size_max);
  const double throughput = model.throughput_bps();

  std::vector<ContentItem> items(raw.size());
  std::vector<double> raw_latency(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    items[i].item_id = static_cast<ItemId>(i);
    items[i].size_units = size_dist(rng);
    // Size units are megabytes.
    const double size_bytes = items[i].size_units * 1.0e6;
    raw_latency[i] = 8.0 * size_bytes / throughput;
  }
  const double max_latency = *std::max_element(raw_latency.begin(), raw_latency.end());
  for (std::size_t i = 0; i < raw.size(); ++i) items[i].latency_norm = raw_latency[i] / max_latency;
  return Catalog(std::move(items), std::move(raw));
}

std::vector<std::int64_t> distinct_items(std::span<const RawRating> ratings) {
  std::set<std::int64_t> ids;
  for (const auto& r : ratings) ids.insert(r.item_id);
  return {ids.begin(), ids.end()};
}

EdgeTraces build_edge_traces(std::span<const RawRating> ratings,
                             const std::map<std::int64_t, EdgeId>& assignments,
                             const Catalog& catalog, int edge_count) {
  if (edge_count < 1) throw UsageError("edge traces: edge_count must be >= 1");
  EdgeTraces traces(static_cast<std::size_t>(edge_count));
  for (const auto& r : ratings) {
    const auto user = assignments.find(r.user_id);
    if (user == assignments.end()) {
      throw DataError("edge traces: user " + std::to_string(r.user_id) + " has no edge");
    }
    if (user->second < 0 || user->second >= edge_count) {
      throw DataError("edge traces: edge id out of range for user " + std::to_string(r.user_id));
    }
    const auto item = catalog.dense_id(r.item_id);
    if (!item) throw DataError("edge traces: item " + std::to_string(r.item_id) + " not in catalog");
    traces[static_cast<std::size_t>(user->second)].push_back(
        {r.timestamp, r.user_id, *item, user->second});
  }
  for (auto& trace : traces) {
    std::stable_sort(trace.begin(), trace.end(),
                     [](const Request& a, const Request& b) { return a.timestamp < b.timestamp; });
  }
  return traces;
}

TraceSplit split_traces(const EdgeTraces& traces, double train_frac, EdgeId transfer_edge_id) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw UsageError("split: train_frac must be in (0,1)");
  if (transfer_edge_id < 0 || static_cast<std::size_t>(transfer_edge_id) >= traces.size()) {
    throw UsageError("split: transfer edge " + std::to_string(transfer_edge_id) + " does not exist");
  }
  TraceSplit split;
  split.transfer_edge_id = transfer_edge_id;
  split.edges.resize(traces.size());
  for (std::size_t e = 0; e < traces.size(); ++e) {
    const auto& trace = traces[e];
    if (static_cast<EdgeId>(e) == transfer_edge_id) {
      split.edges[e].test = trace;
      continue;
    }
    const auto n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(trace.size()) * train_frac + 1e-9));
    split.edges[e].train.assign(trace.begin(), trace.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.edges[e].test.assign(trace.begin() + static_cast<std::ptrdiff_t>(n_train), trace.end());
  }
  return split;
}

void write_trace_csv(std::ostream& out, std::span<const Request> trace) {
  out << "timestamp,user_id,item_id,edge_id\n";
  for (const auto& r : trace) {
    out << r.timestamp << ',' << r.user_id << ',' << r.item_id << ',' << r.edge_id << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, std::span<const Request> trace) {
  auto out = open_output(path);
  write_trace_csv(out, trace);
}

std::vector<Request> read_trace_csv(std::istream& in, const std::string& source) {
  std::vector<Request> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (trim(line) != "timestamp,user_id,item_id,edge_id") {
        throw ParseError(source, line_no, "unexpected trace header");
      }
      continue;
    }
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) throw ParseError(source, line_no, "expected 4 fields");
    const auto ts = parse_number<std::int64_t>(fields[0]);
    const auto user = parse_number<std::int64_t>(fields[1]);
    const auto item = parse_number<ItemId>(fields[2]);
    const auto edge = parse_number<EdgeId>(fields[3]);
    if (!ts || !user || !item || !edge) throw ParseError(source, line_no, "bad field");
    if (!out.empty() && *ts < out.back().timestamp) {
      throw ParseError(source, line_no, "timestamps not ascending");
    }
    out.push_back({*ts, *user, *item, *edge});
  }
  if (line_no == 0) throw ParseError(source, 1, "missing header");
  return out;
}

std::vector<Request> read_trace_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_trace_csv(in, path.string());
}

void write_catalog_csv(std::ostream& out, const Catalog& catalog) {
  out << "item_id,size_units,latency_norm\n";
  for (const auto& item : catalog.items()) {
    out << item.item_id << ',' << format_double("%.6f", item.size_units) << ','
        << format_double("%.9f", item.latency_norm) << '\n';
  }
}

void write_catalog_csv(const std::filesystem::path& path, const Catalog& catalog) {
  auto out = open_output(path);
  write_catalog_csv(out, catalog);
}

Catalog read_catalog_csv(std::istream& in, const std::string& source) {
  std::vector<ContentItem> items;
  std::vector<std::int64_t> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (trim(line) != "item_id,size_units,latency_norm") {
        throw ParseError(source, line_no, "unexpected catalog header");
      }
      continue;
    }
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw ParseError(source, line_no, "expected 3 fields");
    const auto id = parse_number<ItemId>(fields[0]);
    const auto size = parse_number<double>(fields[1]);
    const auto lat = parse_number<double>(fields[2]);
    if (!id || !size || !lat) throw ParseError(source, line_no, "bad field");
    if (*id != items.size()) throw ParseError(source, line_no, "item ids must be 0..M-1 in order");
    if (*lat < 0.0 || *lat > 1.0) throw ParseError(source, line_no, "latency_norm outside [0,1]");
    items.push_back({*id, *size, *lat});
    raw.push_back(*id);
  }
  if (items.empty()) throw DataError(source + ": empty catalog");
  return Catalog(std::move(items), std::move(raw));
}

Catalog read_catalog_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_catalog_csv(in, path.string());
}

}  // namespace deepref::trace
