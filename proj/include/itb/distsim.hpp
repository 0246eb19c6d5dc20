// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "itb/trace.hpp"

namespace itb {

// How file stripes are placed onto object storage devices.
enum class Placement : std::uint8_t {
  round_robin,  // stripe j lands on OSD j mod width
  hashed,       // stripe j lands on mix64-derived pseudo-random OSD
};

struct StripeConfig {
  std::uint64_t stripe_size = 128 << 10;  // bytes per stripe, >= 1
  std::uint32_t width = 4;                // number of OSDs, >= 1
  Placement policy = Placement::round_robin;
  std::uint64_t hash_seed = 0;  // hashed placement only

  void validate() const;
};

// OSD index holding stripe `stripe_index` of the file identified by
// `file_id`. Hashed placement chains the documented splitmix64 finalizer:
// mix64(mix64(mix64(hash_seed) ^ file_id) ^ stripe_index) % width.
std::uint32_t place_stripe(const StripeConfig& cfg, std::uint64_t file_id,
                           std::uint64_t stripe_index);

// Stable file identifier: FNV-1a over the path bytes.
std::uint64_t file_id_of(std::string_view path);

// Set of OSDs storing any byte of [offset, offset + length), ascending and
// deduplicated. length >= 1.
std::vector<std::uint32_t> map_access(const StripeConfig& cfg,
                                      std::uint64_t file_id,
                                      std::uint64_t offset,
                                      std::uint64_t length);

// Per-second, per-op-kind access counts over the OSDs of one volume.
struct OsdPattern {
  std::int64_t second = 0;  // floor(shifted t_start / 1s)
  OpKind op = OpKind::Read;
  std::vector<std::uint64_t> counts;  // one entry per OSD
};

// Maps every read and write of the superposed streams onto OSDs and
// aggregates per-second patterns. Stream i is shifted by start_offsets[i]
// (defaulting to 0 when fewer offsets than streams are given). Offsets for
// the accesses are reconstructed with the implicit position model. Patterns
// exist only for seconds that received at least one access of that kind;
// ops spanning a second boundary count once, in their start bucket.
std::vector<OsdPattern> build_patterns(std::span<const IoStream> streams,
                                       const StripeConfig& cfg,
                                       std::span<const std::int64_t> start_offsets);

enum class SigmaEstimator { population, sample };

// Standard deviation of the pattern's counts; population (divide by N) by
// default, the sample estimator behind a flag for cross-checks.
double pattern_sigma(const OsdPattern& p,
                     SigmaEstimator estimator = SigmaEstimator::population);

// Idealized model of a pattern with k active entries of equal value m and
// N - k idle entries: sigma = m * sqrt(k * (N - k)) / N. Largest when the
// pattern is half full. Raises domain_error if k > width.
double analytic_sigma(std::uint32_t active_count, std::uint32_t width,
                      double active_value);

// Number of entries strictly above the threshold.
std::uint32_t classify_active(const OsdPattern& p, std::uint64_t threshold);

inline constexpr std::uint64_t default_active_threshold = 30;

// Load-balance quality of a pattern sequence: the per-kind mean of the
// per-second standard deviations, plus the distribution of patterns by
// active-entry count. A side with no patterns is reported absent.
struct BalanceReport {
  std::optional<double> avg_sigma_read;
  std::optional<double> avg_sigma_write;
  std::uint64_t read_patterns = 0;
  std::uint64_t write_patterns = 0;
  std::map<std::uint32_t, double> active_read;   // active count -> fraction
  std::map<std::uint32_t, double> active_write;
};

BalanceReport balance_report(std::span<const OsdPattern> patterns,
                             std::uint64_t threshold = default_active_threshold,
                             SigmaEstimator estimator = SigmaEstimator::population);

}  // namespace itb
