#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "deepref/types.hpp"

namespace deepref::trace {

struct RawRating {
  std::int64_t user_id = 0;
  std::int64_t item_id = 0;
  int rating = 0;
  std::int64_t timestamp = 0;

  friend bool operator==(const RawRating&, const RawRating&) = default;
};

struct UserRecord {
  std::int64_t user_id = 0;
  std::string zip;
};

struct UserGeo {
  std::int64_t user_id = 0;
  std::string zip;
  double lat = 0.0;
  double lon = 0.0;
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

using ZipTable = std::unordered_map<std::string, GeoPoint>;

struct GeocodeResult {
  std::vector<UserGeo> users;
  // Users whose zip was absent from the table; they are dropped.
  std::size_t unresolved = 0;
};

struct Request {
  std::int64_t timestamp = 0;
  std::int64_t user_id = 0;
  ItemId item_id = 0;
  EdgeId edge_id = 0;

  friend bool operator==(const Request&, const Request&) = default;
};

struct ContentItem {
  ItemId item_id = 0;
  double size_units = 0.0;
  double latency_norm = 0.0;
};

// TCP throughput model used to turn sizes into fetch latencies:
// throughput = 8 * cwnd / rtt (bits per second).
struct ThroughputModel {
  double cwnd_bytes = 65536.0;
  double rtt_seconds = 0.1;

  double throughput_bps() const { return 8.0 * cwnd_bytes / rtt_seconds; }
};

// Dense item catalog. Item ids are 0..M-1; raw_ids[i] is the dataset id that
// maps onto dense id i (ascending).
class Catalog {
 public:
  Catalog() = default;
  Catalog(std::vector<ContentItem> items, std::vector<std::int64_t> raw_ids);

  std::size_t size() const { return items_.size(); }
  const std::vector<ContentItem>& items() const { return items_; }
  const ContentItem& operator[](ItemId id) const { return items_.at(id); }
  const std::vector<std::int64_t>& raw_ids() const { return raw_ids_; }

  std::optional<ItemId> dense_id(std::int64_t raw_id) const;
  std::vector<double> latencies() const;

 private:
  std::vector<ContentItem> items_;
  std::vector<std::int64_t> raw_ids_;
};

struct KMeansResult {
  std::vector<int> assignments;
  std::vector<GeoPoint> centroids;
  int iterations = 0;
  // Within-cluster sum of squares after every assignment step.
  std::vector<double> wcss_history;
};

using EdgeTraces = std::vector<std::vector<Request>>;

struct EdgeSplit {
  std::vector<Request> train;
  std::vector<Request> test;
};

struct TraceSplit {
  std::vector<EdgeSplit> edges;
  EdgeId transfer_edge_id = 0;
};

// --- ingestion -------------------------------------------------------------

std::vector<RawRating> parse_ratings(std::istream& in, const std::string& source = "<stream>");
std::vector<RawRating> parse_ratings(const std::filesystem::path& path);

// ml-100k u.user layout: id|age|gender|occupation|zip
std::vector<UserRecord> parse_users(std::istream& in, const std::string& source = "<stream>");
std::vector<UserRecord> parse_users(const std::filesystem::path& path);

// CSV with header `zip,lat,lon`.
ZipTable parse_zip_table(std::istream& in, const std::string& source = "<stream>");
ZipTable parse_zip_table(const std::filesystem::path& path);

GeocodeResult geocode_users(std::span<const UserRecord> users, const ZipTable& zip_table);

// --- clustering ------------------------------------------------------------

double squared_distance(const GeoPoint& a, const GeoPoint& b);

// Within-cluster sum of squared distances to the given centroids.
double within_cluster_ss(std::span<const GeoPoint> points, std::span<const int> assignments,
                         std::span<const GeoPoint> centroids);

// Lloyd's algorithm with Forgy initialization (k distinct points drawn by
// seed). Runs `restarts` initializations from one seeded stream and keeps the
// lowest final within-cluster sum of squares.
KMeansResult kmeans(std::span<const GeoPoint> points, int k, std::uint64_t seed,
                    int max_iterations = 300, int restarts = 10);

std::vector<double> silhouette_values(std::span<const GeoPoint> points,
                                      std::span<const int> assignments);
double silhouette_score(std::span<const GeoPoint> points, std::span<const int> assignments);

// --- catalog and traces ----------------------------------------------------

Catalog build_catalog(std::span<const std::int64_t> item_ids, std::uint64_t seed, double size_min,
                      double size_max, const ThroughputModel& model = {});

// Dataset item ids in ascending order, deduplicated.
std::vector<std::int64_t> distinct_items(std::span<const RawRating> ratings);

// `assignments` maps user id to edge id; every rating's user must be present.
EdgeTraces build_edge_traces(std::span<const RawRating> ratings,
                             const std::map<std::int64_t, EdgeId>& assignments,
                             const Catalog& catalog, int edge_count);

TraceSplit split_traces(const EdgeTraces& traces, double train_frac, EdgeId transfer_edge_id);

// --- file formats ----------------------------------------------------------

void write_trace_csv(std::ostream& out, std::span<const Request> trace);
void write_trace_csv(const std::filesystem::path& path, std::span<const Request> trace);
std::vector<Request> read_trace_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<Request> read_trace_csv(const std::filesystem::path& path);

// latency_norm is printed with 9 decimal digits.
void write_catalog_csv(std::ostream& out, const Catalog& catalog);
void write_catalog_csv(const std::filesystem::path& path, const Catalog& catalog);
Catalog read_catalog_csv(std::istream& in, const std::string& source = "<stream>");
Catalog read_catalog_csv(const std::filesystem::path& path);

}  // namespace deepref::trace
