// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#include "itb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <vector>

namespace itb {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) {
  return v ? num(*v) : std::string();
}

}  // namespace

RunReport summarize(const ReplayLog& log, std::string config_echo) {
  if (log.entries.empty()) raise(Errc::empty_log, "log has no entries");

  RunReport report;
  report.config_echo = std::move(config_echo);

  std::int64_t read_latency_sum = 0, write_latency_sum = 0;
  std::int64_t first_scheduled = log.entries.front().scheduled_start_ns;
  std::int64_t last_end = 0;
  std::set<std::uint32_t> streams;

  for (const auto& e : log.entries) {
    streams.insert(e.stream_id);
    first_scheduled = std::min(first_scheduled, e.scheduled_start_ns);
    last_end = std::max(last_end, e.actual_start_ns + e.latency_ns);
    if (e.error != 0) continue;
    if (e.op == OpKind::Read) {
      report.read_count += 1;
      report.read_bytes += e.bytes;
      read_latency_sum += e.latency_ns;
    } else if (e.op == OpKind::Write) {
      report.write_count += 1;
      report.write_bytes += e.bytes;
      write_latency_sum += e.latency_ns;
    }
  }

  if (report.read_count > 0)
    report.read_mean_latency_s = static_cast<double>(read_latency_sum) / 1e9 /
                                 static_cast<double>(report.read_count);
  if (report.write_count > 0)
    report.write_mean_latency_s = static_cast<double>(write_latency_sum) / 1e9 /
                                  static_cast<double>(report.write_count);

  report.n_streams = streams.size();
  report.wall_duration_s =
      static_cast<double>(last_end - first_scheduled) / 1e9;
  const double total_bytes =
      static_cast<double>(report.read_bytes + report.write_bytes);
  report.aggregate_throughput_bps =
      report.wall_duration_s > 0 ? total_bytes / report.wall_duration_s : 0.0;
  return report;
}

MetricStats stats_of(std::span<const double> values, Estimator estimator) {
  MetricStats stats;
  const std::size_t n = values.size();
  if (n == 0) return stats;
  double sum = 0;
  for (double v : values) sum += v;
  stats.mean = sum / static_cast<double>(n);
  double ss = 0;
  for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
  const double divisor = estimator == Estimator::population
                             ? static_cast<double>(n)
                             : static_cast<double>(n > 1 ? n - 1 : 1);
  stats.stddev = std::sqrt(ss / divisor);
  if (stats.mean != 0) stats.normalized = stats.stddev / stats.mean;
  return stats;
}

RepetitionStats repetition_stats(std::span<const RunReport> reports,
                                 Estimator estimator) {
  if (reports.size() < 2)
    raise(Errc::invalid_spec, "repetition statistics need at least 2 reports");
  for (const auto& r : reports)
    if (r.config_echo != reports.front().config_echo)
      raise(Errc::mismatched_configs,
            "'" + r.config_echo + "' vs '" + reports.front().config_echo + "'");

  RepetitionStats stats;
  stats.repetitions = reports.size();
  stats.estimator = estimator;
  stats.config_echo = reports.front().config_echo;

  auto add_metric = [&](const std::string& name, auto getter) {
    std::vector<double> values;
    values.reserve(reports.size());
    for (const auto& r : reports) {
      auto v = getter(r);
      if (!v) return;  // reported absent unless every repetition has it
      values.push_back(*v);
    }
    stats.metrics[name] = stats_of(values, estimator);
  };

  add_metric("read_mean_latency_s",
             [](const RunReport& r) { return r.read_mean_latency_s; });
  add_metric("write_mean_latency_s",
             [](const RunReport& r) { return r.write_mean_latency_s; });
  add_metric("aggregate_throughput_bps", [](const RunReport& r) {
    return std::optional<double>(r.aggregate_throughput_bps);
  });
  add_metric("wall_duration_s", [](const RunReport& r) {
    return std::optional<double>(r.wall_duration_s);
  });
  return stats;
}

void emit_report(const RunReport& report, TableFormat format,
                 std::ostream& out) {
  const char d = format == TableFormat::csv ? ',' : '\t';
  out << "n_streams" << d << "wall_duration_s" << d << "read_count" << d
      << "read_mean_latency_s" << d << "read_total_bytes" << d << "write_count"
      << d << "write_mean_latency_s" << d << "write_total_bytes" << d
      << "aggregate_throughput_bps" << d << "config" << '\n';
  out << report.n_streams << d << num(report.wall_duration_s) << d
      << report.read_count << d << opt_num(report.read_mean_latency_s) << d
      << report.read_bytes << d << report.write_count << d
      << opt_num(report.write_mean_latency_s) << d << report.write_bytes << d
      << num(report.aggregate_throughput_bps) << d << report.config_echo
      << '\n';
}

void emit_report(const RepetitionStats& stats, TableFormat format,
                 std::ostream& out) {
  const char d = format == TableFormat::csv ? ',' : '\t';
  out << "metric" << d << "mean" << d << "stddev" << d << "normalized_stddev"
      << d << "estimator" << d << "repetitions" << '\n';
  const char* estimator =
      stats.estimator == Estimator::sample ? "sample" : "population";
  for (const auto& [name, m] : stats.metrics) {
    out << name << d << num(m.mean) << d << num(m.stddev) << d
        << opt_num(m.normalized) << d << estimator << d << stats.repetitions
        << '\n';
  }
}

}  // namespace itb
