#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "leocp/handover.hpp"

namespace leocp {

struct EmptyInput : std::invalid_argument {
  EmptyInput() : std::invalid_argument("cdf of an empty sample") {}
};

struct SatelliteMetrics {
  std::size_t handover_count = 0;
  double mean_handover_duration_s = 0.0;
  double total_duration_s = 0.0;
  double total_invisibility_s = 0.0;
  double total_pod_unavail_s = 0.0;
  std::size_t report_count = 0;
  double mean_report_latency_ms = 0.0;
};

struct AggregateMetrics {
  std::size_t total_handovers = 0;
  std::size_t satellites = 0;
  double mean_duration_s = 0.0;
  double handovers_per_satellite = 0.0;
  double total_duration_s = 0.0;
  double total_invisibility_s = 0.0;
  double total_pod_unavail_s = 0.0;
  double total_duration_h = 0.0;
  double total_invisibility_h = 0.0;
  double total_pod_unavail_h = 0.0;
  // Percentiles over per-satellite mean report latency.
  double report_latency_mean_ms = 0.0;
  double report_latency_p50_ms = 0.0;
  double report_latency_p90_ms = 0.0;
  double report_latency_p99_ms = 0.0;
  double report_latency_max_ms = 0.0;
};

struct CdfPoint {
  double value = 0.0;
  double fraction = 0.0;
};

struct MetricsReport {
  std::map<std::size_t, SatelliteMetrics> per_satellite;
  AggregateMetrics aggregate;
  std::vector<CdfPoint> cdf_points;  // per-satellite mean report latency
};

MetricsReport aggregate(std::span<const HandoverRecord> records, std::span<const ReportSample> reports,
                        std::size_t n_sats = 0);

/// Sorted ascending, fraction k/n at the k-th value.
std::vector<CdfPoint> cdf(std::span<const double> values);

/// Nearest-rank percentile, q in [0, 100].
double percentile(std::span<const double> values, double q);

nlohmann::json to_json(const MetricsReport& report);

/// Table columns: name, total handovers, mean duration (s), invisibility (h), pod unavailability (h).
void write_overhead_table(std::ostream& os, const std::string& name, const MetricsReport& report);
void write_per_satellite_csv(std::ostream& os, const MetricsReport& report);
void write_cdf_csv(std::ostream& os, std::span<const CdfPoint> points);
void write_report_samples_csv(std::ostream& os, std::span<const ReportSample> samples);

std::vector<HandoverRecord> read_records_csv(std::istream& is);
std::vector<ReportSample> read_report_samples_csv(std::istream& is);

}  // namespace leocp
