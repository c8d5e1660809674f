#include "leocp/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "leocp/format.hpp"

namespace leocp {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class Row>
std::vector<Row> read_csv(std::istream& is, std::size_t columns, Row (*parse)(const std::vector<std::string>&)) {
  std::vector<Row> rows;
  std::string line;
  if (!std::getline(is, line)) return rows;  // header
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != columns)
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected " + std::to_string(columns) + " columns");
    rows.push_back(parse(cells));
  }
  return rows;
}

HandoverRecord parse_record(const std::vector<std::string>& c) {
  HandoverRecord r;
  r.sat = std::stoul(c[0]);
  r.t_start = std::stod(c[1]);
  r.duration = std::stod(c[2]);
  r.t_end = r.t_start + r.duration;
  r.invisibility = std::stod(c[3]);
  r.pod_unavailability = std::stod(c[4]);
  r.protocol = parse_protocol(c[5]);
  r.source = std::stoi(c[6]);
  r.target = std::stoi(c[7]);
  r.complete = true;
  return r;
}

ReportSample parse_sample(const std::vector<std::string>& c) {
  return {std::stoul(c[0]), std::stod(c[1]), std::stod(c[2])};
}

}  // namespace

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw EmptyInput();
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double rank = std::ceil(q / 100.0 * static_cast<double>(v.size()));
  const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(v.size()))) - 1;
  return v[idx];
}

std::vector<CdfPoint> cdf(std::span<const double> values) {
  if (values.empty()) throw EmptyInput();
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  std::vector<CdfPoint> out;
  out.reserve(v.size());
  const auto n = static_cast<double>(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back({v[k], static_cast<double>(k + 1) / n});
  return out;
}

MetricsReport aggregate(std::span<const HandoverRecord> records, std::span<const ReportSample> reports,
                        std::size_t n_sats) {
  MetricsReport rep;
  for (std::size_t s = 0; s < n_sats; ++s) rep.per_satellite[s];

  for (const auto& r : records) {
    auto& m = rep.per_satellite[r.sat];
    ++m.handover_count;
    m.total_duration_s += r.duration;
    m.total_invisibility_s += r.invisibility;
    m.total_pod_unavail_s += r.pod_unavailability;
  }
  std::map<std::size_t, double> latency_sum;
  for (const auto& s : reports) {
    auto& m = rep.per_satellite[s.sat];
    ++m.report_count;
    latency_sum[s.sat] += s.latency_ms;
  }

  auto& agg = rep.aggregate;
  std::vector<double> mean_latencies;
  for (auto& [sat, m] : rep.per_satellite) {
    if (m.handover_count) m.mean_handover_duration_s = m.total_duration_s / static_cast<double>(m.handover_count);
    if (m.report_count) {
      m.mean_report_latency_ms = latency_sum[sat] / static_cast<double>(m.report_count);
      mean_latencies.push_back(m.mean_report_latency_ms);
    }
    agg.total_handovers += m.handover_count;
    agg.total_duration_s += m.total_duration_s;
    agg.total_invisibility_s += m.total_invisibility_s;
    agg.total_pod_unavail_s += m.total_pod_unavail_s;
  }
  agg.satellites = rep.per_satellite.size();
  if (agg.total_handovers) agg.mean_duration_s = agg.total_duration_s / static_cast<double>(agg.total_handovers);
  if (agg.satellites)
    agg.handovers_per_satellite = static_cast<double>(agg.total_handovers) / static_cast<double>(agg.satellites);
  agg.total_duration_h = agg.total_duration_s / 3600.0;
  agg.total_invisibility_h = agg.total_invisibility_s / 3600.0;
  agg.total_pod_unavail_h = agg.total_pod_unavail_s / 3600.0;

  if (!mean_latencies.empty()) {
    double sum = 0.0;
    for (double v : mean_latencies) sum += v;
    agg.report_latency_mean_ms = sum / static_cast<double>(mean_latencies.size());
    agg.report_latency_p50_ms = percentile(mean_latencies, 50);
    agg.report_latency_p90_ms = percentile(mean_latencies, 90);
    agg.report_latency_p99_ms = percentile(mean_latencies, 99);
    agg.report_latency_max_ms = percentile(mean_latencies, 100);
    rep.cdf_points = cdf(mean_latencies);
  }
  return rep;
}

nlohmann::json to_json(const MetricsReport& report) {
  const auto& a = report.aggregate;
  nlohmann::json j;
  j["aggregate"] = {{"total_handovers", a.total_handovers},
                    {"satellites", a.satellites},
                    {"handovers_per_satellite", a.handovers_per_satellite},
                    {"mean_duration_s", a.mean_duration_s},
                    {"total_duration_h", a.total_duration_h},
                    {"total_invisibility_h", a.total_invisibility_h},
                    {"total_pod_unavail_h", a.total_pod_unavail_h},
                    {"report_latency_ms",
                     {{"mean", a.report_latency_mean_ms},
                      {"p50", a.report_latency_p50_ms},
                      {"p90", a.report_latency_p90_ms},
                      {"p99", a.report_latency_p99_ms},
                      {"max", a.report_latency_max_ms}}}};
  return j;
}

void write_overhead_table(std::ostream& os, const std::string& name, const MetricsReport& report) {
  const auto& a = report.aggregate;
  os << "constellation,total_handovers,avg_duration_per_handover_s,total_node_invisibility_h,total_pod_unavailability_h\n";
  os << name << ',' << a.total_handovers << ',' << fixed(a.mean_duration_s, 2) << ',' << fixed(a.total_invisibility_h, 2)
     << ',' << fixed(a.total_pod_unavail_h, 2) << '\n';
}

void write_per_satellite_csv(std::ostream& os, const MetricsReport& report) {
  os << "sat_id,handover_count,mean_handover_duration_s,total_invisibility_s,total_pod_unavail_s,mean_report_latency_ms\n";
  for (const auto& [sat, m] : report.per_satellite)
    os << sat << ',' << m.handover_count << ',' << fixed(m.mean_handover_duration_s) << ','
       << fixed(m.total_invisibility_s) << ',' << fixed(m.total_pod_unavail_s) << ',' << fixed(m.mean_report_latency_ms)
       << '\n';
}

void write_cdf_csv(std::ostream& os, std::span<const CdfPoint> points) {
  os << "value,fraction\n";
  for (const auto& p : points) os << fixed(p.value) << ',' << fixed(p.fraction) << '\n';
}

void write_report_samples_csv(std::ostream& os, std::span<const ReportSample> samples) {
  os << "sat_id,t_generated,latency_ms\n";
  for (const auto& s : samples) os << s.sat << ',' << fixed(s.t_generated) << ',' << fixed(s.latency_ms) << '\n';
}

std::vector<HandoverRecord> read_records_csv(std::istream& is) { return read_csv<HandoverRecord>(is, 8, parse_record); }

std::vector<ReportSample> read_report_samples_csv(std::istream& is) {
  return read_csv<ReportSample>(is, 3, parse_sample);
}

}  // namespace leocp
