// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "itb/replay.hpp"

namespace itb {

// Performance measures of one replay run: per-kind average latency and the
// aggregate throughput over all concurrent streams.
struct RunReport {
  std::optional<double> read_mean_latency_s;  // absent when no reads
  std::uint64_t read_count = 0;
  std::uint64_t read_bytes = 0;
  std::optional<double> write_mean_latency_s;  // absent when no writes
  std::uint64_t write_count = 0;
  std::uint64_t write_bytes = 0;
  double aggregate_throughput_bps = 0;  // (read+write bytes) / wall duration
  double wall_duration_s = 0;  // first scheduled start to last completion
  std::uint64_t n_streams = 0;
  std::string config_echo;
};

// Aggregates a log. Latency means and byte totals cover the ops that
// completed without error. Raises empty_log on an empty log.
RunReport summarize(const ReplayLog& log, std::string config_echo = "");

enum class Estimator { population, sample };

struct MetricStats {
  double mean = 0;
  double stddev = 0;
  std::optional<double> normalized;  // stddev / mean, absent when mean == 0
};

// Mean / spread / normalized spread of one value list.
MetricStats stats_of(std::span<const double> values, Estimator estimator);

// Cross-repetition stability of the run metrics. All reports must carry an
// identical config echo (mismatched_configs otherwise, invalid_spec when
// fewer than two reports are given).
struct RepetitionStats {
  std::size_t repetitions = 0;
  Estimator estimator = Estimator::sample;
  std::string config_echo;
  std::map<std::string, MetricStats> metrics;
};

RepetitionStats repetition_stats(std::span<const RunReport> reports,
                                 Estimator estimator = Estimator::sample);

enum class TableFormat { csv, tsv };

// Tabular output with lossless numeric formatting (17 significant digits)
// and a fixed column order.
void emit_report(const RunReport& report, TableFormat format, std::ostream& out);
void emit_report(const RepetitionStats& stats, TableFormat format,
                 std::ostream& out);

}  // namespace itb
