#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deepref::metrics {

// Raw per-run tallies. Every ratio in MetricsReport is derived from these.
struct Counters {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t sent_prefetches = 0;
  // Prefetched residencies that received at least one hit; counted once per
  // residency.
  std::uint64_t used_prefetches = 0;
  // Steps each item resided since insertion or its last hit, taken at
  // eviction or at episode end.
  std::vector<std::int64_t> timeliness_samples;

  std::uint64_t requests() const { return hits + misses; }

  Counters& operator+=(const Counters& other);
};

struct Timeliness {
  double mean = 0.0;
  double stddev = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  double coverage = 0.0;
  double aggressiveness = 0.0;
  // Empty when no residency was ever recorded.
  std::optional<Timeliness> timeliness;
  Counters totals;
  std::vector<Counters> episodes;
};

// hits / (hits + misses). Throws on zero requests.
double accuracy(const Counters& c);
// used / sent; 0 when nothing was sent.
double coverage(const Counters& c);
// sent / (hits + misses). Throws on zero requests.
double aggressiveness(const Counters& c);
// Mean and population standard deviation; nullopt for no samples.
std::optional<Timeliness> timeliness_stats(std::span<const std::int64_t> samples);

MetricsReport report(const Counters& c);

// Sums counters across episodes before computing any ratio and pools the
// timeliness samples.
MetricsReport aggregate(std::span<const Counters> episodes);

// Recomputes each ratio against the integer counters; returns a description
// of the first broken identity, or nullopt when all hold.
std::optional<std::string> check_identities(const MetricsReport& r);

// One line of the results table.
struct ResultRow {
  std::string policy;
  int edge_id = 0;
  int capacity = 0;
  std::string split;
  MetricsReport metrics;
  std::size_t episodes = 0;
  std::uint64_t seed = 0;
  // Edge the agent was trained on, for transfer rows.
  std::optional<int> source_edge;
};

std::string result_csv_header();
std::string to_csv(const ResultRow& row);
void write_results_csv(std::ostream& out, std::span<const ResultRow> rows);
std::string to_json(std::span<const ResultRow> rows);

// Parses rows written by write_results_csv (counters are not round-tripped).
struct ParsedRow {
  std::string policy;
  int edge_id = 0;
  int capacity = 0;
  std::string split;
  double accuracy = 0.0;
  double coverage = 0.0;
  double aggressiveness = 0.0;
  std::optional<double> timeliness_mean;
  std::optional<double> timeliness_std;
  std::size_t episodes = 0;
  std::uint64_t seed = 0;
  std::optional<int> source_edge;
};
std::vector<ParsedRow> read_results_csv(std::istream& in, const std::string& source = "<stream>");

}  // namespace deepref::metrics
