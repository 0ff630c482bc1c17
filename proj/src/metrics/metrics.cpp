#include "deepref/metrics/metrics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "deepref/error.hpp"

namespace deepref::metrics {

Counters& Counters::operator+=(const Counters& other) {
  hits += other.hits;
  misses += other.misses;
  sent_prefetches += other.sent_prefetches;
  used_prefetches += other.used_prefetches;
  timeliness_samples.insert(timeliness_samples.end(), other.timeliness_samples.begin(),
                            other.timeliness_samples.end());
  return *this;
}

double accuracy(const Counters& c) {
  if (c.requests() == 0) throw UsageError("accuracy: no requests");
  return static_cast<double>(c.hits) / static_cast<double>(c.requests());
}

double coverage(const Counters& c) {
  if (c.sent_prefetches == 0) return 0.0;
  return static_cast<double>(c.used_prefetches) / static_cast<double>(c.sent_prefetches);
}

double aggressiveness(const Counters& c) {
  if (c.requests() == 0) throw UsageError("aggressiveness: no requests");
  return static_cast<double>(c.sent_prefetches) / static_cast<double>(c.requests());
}

std::optional<Timeliness> timeliness_stats(std::span<const std::int64_t> samples) {
  if (samples.empty()) return std::nullopt;
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (auto s : samples) sum += static_cast<double>(s);
  const double mean = sum / n;
  double sq = 0.0;
  for (auto s : samples) {
    const double d = static_cast<double>(s) - mean;
    sq += d * d;
  }
  return Timeliness{mean, std::sqrt(sq / n)};
}

MetricsReport report(const Counters& c) {
  MetricsReport r;
  r.accuracy = accuracy(c);
  r.coverage = coverage(c);
  r.aggressiveness = aggressiveness(c);
  r.timeliness = timeliness_stats(c.timeliness_samples);
  r.totals = c;
  r.episodes = {c};
  return r;
}

MetricsReport aggregate(std::span<const Counters> episodes) {
  if (episodes.empty()) throw UsageError("aggregate: no episodes");
  Counters total;
  for (const auto& e : episodes) total += e;
  MetricsReport r = report(total);
  r.episodes.assign(episodes.begin(), episodes.end());
  return r;
}

namespace {

bool times_matches(double ratio, std::uint64_t denom, std::uint64_t numer) {
  const double product = ratio * static_cast<double>(denom);
  return std::llround(product) == static_cast<long long>(numer) &&
         std::abs(product - static_cast<double>(numer)) <= 1e-9 * static_cast<double>(denom + 1);
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::optional<std::string> check_identities(const MetricsReport& r) {
  const auto& c = r.totals;
  if (c.used_prefetches > c.sent_prefetches) return "used prefetches exceed sent prefetches";
  if (!times_matches(r.accuracy, c.requests(), c.hits)) return "accuracy * requests != hits";
  if (c.sent_prefetches > 0 && !times_matches(r.coverage, c.sent_prefetches, c.used_prefetches)) {
    return "coverage * sent != used";
  }
  if (c.sent_prefetches == 0 && r.coverage != 0.0) return "coverage must be 0 with nothing sent";
  if (!times_matches(r.aggressiveness, c.requests(), c.sent_prefetches)) {
    return "aggressiveness * requests != sent";
  }
  if (!std::isfinite(r.accuracy) || !std::isfinite(r.coverage) || !std::isfinite(r.aggressiveness)) {
    return "non-finite ratio";
  }
  if (r.accuracy < 0.0 || r.accuracy > 1.0 || r.coverage < 0.0 || r.coverage > 1.0) {
    return "ratio outside [0,1]";
  }
  return std::nullopt;
}

std::string result_csv_header() {
  return "policy,edge_id,capacity,split,accuracy,coverage,aggressiveness,timeliness_mean,"
         "timeliness_std,episodes,seed,source_edge";
}

std::string to_csv(const ResultRow& row) {
  std::ostringstream out;
  const auto& m = row.metrics;
  out << row.policy << ',' << row.edge_id << ',' << row.capacity << ',' << row.split << ','
      << fmt("%.6f", m.accuracy) << ',' << fmt("%.6f", m.coverage) << ','
      << fmt("%.6f", m.aggressiveness) << ',';
  if (m.timeliness) {
    out << fmt("%.4f", m.timeliness->mean) << ',' << fmt("%.4f", m.timeliness->stddev);
  } else {
    out << ',';
  }
  out << ',' << row.episodes << ',' << row.seed << ',';
  if (row.source_edge) out << *row.source_edge;
  return out.str();
}

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << result_csv_header() << '\n';
  for (const auto& row : rows) out << to_csv(row) << '\n';
}

std::string to_json(std::span<const ResultRow> rows) {
  auto arr = nlohmann::json::array();
  for (const auto& row : rows) {
    const auto& m = row.metrics;
    nlohmann::json j = {
        {"policy", row.policy},
        {"edge_id", row.edge_id},
        {"capacity", row.capacity},
        {"split", row.split},
        {"accuracy", m.accuracy},
        {"coverage", m.coverage},
        {"aggressiveness", m.aggressiveness},
        {"timeliness_mean", m.timeliness ? nlohmann::json(m.timeliness->mean) : nlohmann::json()},
        {"timeliness_std", m.timeliness ? nlohmann::json(m.timeliness->stddev) : nlohmann::json()},
        {"episodes", row.episodes},
        {"seed", row.seed},
        {"hits", m.totals.hits},
        {"misses", m.totals.misses},
        {"sent_prefetches", m.totals.sent_prefetches},
        {"used_prefetches", m.totals.used_prefetches},
    };
    if (row.source_edge) j["source_edge"] = *row.source_edge;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_or_throw(const std::string& s, const std::string& source, std::size_t line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(source, line, "bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<ParsedRow> read_results_csv(std::istream& in, const std::string& source) {
  std::vector<ParsedRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != result_csv_header()) throw ParseError(source, 1, "unexpected results header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 12) throw ParseError(source, line_no, "expected 12 fields");
    ParsedRow r;
    r.policy = f[0];
    r.edge_id = parse_or_throw<int>(f[1], source, line_no);
    r.capacity = parse_or_throw<int>(f[2], source, line_no);
    r.split = f[3];
    r.accuracy = parse_or_throw<double>(f[4], source, line_no);
    r.coverage = parse_or_throw<double>(f[5], source, line_no);
    r.aggressiveness = parse_or_throw<double>(f[6], source, line_no);
    if (!f[7].empty()) r.timeliness_mean = parse_or_throw<double>(f[7], source, line_no);
    if (!f[8].empty()) r.timeliness_std = parse_or_throw<double>(f[8], source, line_no);
    r.episodes = parse_or_throw<std::size_t>(f[9], source, line_no);
    r.seed = parse_or_throw<std::uint64_t>(f[10], source, line_no);
    if (!f[11].empty()) r.source_edge = parse_or_throw<int>(f[11], source, line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace deepref::metrics
