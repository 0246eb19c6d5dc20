// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#include "itb/distsim.hpp"

#include <algorithm>
#include <cmath>

#include "itb/rng.hpp"

namespace itb {

void StripeConfig::validate() const {
  if (stripe_size < 1) raise(Errc::invalid_spec, "stripe_size must be >= 1");
  if (width < 1) raise(Errc::invalid_spec, "width must be >= 1");
}

std::uint32_t place_stripe(const StripeConfig& cfg, std::uint64_t file_id,
                           std::uint64_t stripe_index) {
  if (cfg.policy == Placement::round_robin)
    return static_cast<std::uint32_t>(stripe_index % cfg.width);
  std::uint64_t h = mix64(mix64(mix64(cfg.hash_seed) ^ file_id) ^ stripe_index);
  return static_cast<std::uint32_t>(h % cfg.width);
}

std::uint64_t file_id_of(std::string_view path) {
  return hash_bytes(path.data(), path.size());
}

std::vector<std::uint32_t> map_access(const StripeConfig& cfg,
                                      std::uint64_t file_id,
                                      std::uint64_t offset,
                                      std::uint64_t length) {
  cfg.validate();
  std::vector<std::uint32_t> osds;
  if (length == 0) return osds;
  const std::uint64_t first = offset / cfg.stripe_size;
  const std::uint64_t last = (offset + length - 1) / cfg.stripe_size;
  osds.reserve(std::min<std::uint64_t>(last - first + 1, cfg.width));
  for (std::uint64_t j = first; j <= last; ++j) {
    osds.push_back(place_stripe(cfg, file_id, j));
    // Round-robin saturates after one full turn; no point walking further.
    if (cfg.policy == Placement::round_robin && j - first + 1 >= cfg.width)
      break;
  }
  std::sort(osds.begin(), osds.end());
  osds.erase(std::unique(osds.begin(), osds.end()), osds.end());
  return osds;
}

std::vector<OsdPattern> build_patterns(std::span<const IoStream> streams,
                                       const StripeConfig& cfg,
                                       std::span<const std::int64_t> start_offsets) {
  cfg.validate();
  constexpr std::int64_t ns_per_second = 1'000'000'000;

  // (op, second) -> counts. Ordered map keeps the output deterministic.
  std::map<std::pair<int, std::int64_t>, std::vector<std::uint64_t>> buckets;

  for (std::size_t si = 0; si < streams.size(); ++si) {
    const IoStream& stream = streams[si];
    const std::int64_t shift = si < start_offsets.size() ? start_offsets[si] : 0;
    walk_positions(stream, [&](std::size_t i, std::string_view path,
                               std::uint64_t offset) {
      const TraceEvent& e = stream.events[i];
      const std::uint64_t length = e.nbytes.value_or(0);
      if (length == 0) return;
      const std::int64_t shifted = e.t_start + shift;
      const std::int64_t second = shifted / ns_per_second;
      auto key = std::make_pair(e.op == OpKind::Read ? 0 : 1, second);
      auto [it, inserted] = buckets.try_emplace(key);
      if (inserted) it->second.assign(cfg.width, 0);
      for (std::uint32_t osd : map_access(cfg, file_id_of(path), offset, length))
        it->second[osd] += 1;
    });
  }

  std::vector<OsdPattern> patterns;
  patterns.reserve(buckets.size());
  for (auto& [key, counts] : buckets) {
    OsdPattern p;
    p.op = key.first == 0 ? OpKind::Read : OpKind::Write;
    p.second = key.second;
    p.counts = std::move(counts);
    patterns.push_back(std::move(p));
  }
  return patterns;
}

double pattern_sigma(const OsdPattern& p, SigmaEstimator estimator) {
  const std::size_t n = p.counts.size();
  if (n == 0) return 0.0;
  double mean = 0.0;
  for (std::uint64_t c : p.counts) mean += static_cast<double>(c);
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::uint64_t c : p.counts) {
    const double d = static_cast<double>(c) - mean;
    ss += d * d;
  }
  const double divisor = estimator == SigmaEstimator::population
                             ? static_cast<double>(n)
                             : static_cast<double>(n > 1 ? n - 1 : 1);
  return std::sqrt(ss / divisor);
}

double analytic_sigma(std::uint32_t active_count, std::uint32_t width,
                      double active_value) {
  if (width < 1) raise(Errc::domain_error, "width must be >= 1");
  if (active_count > width)
    raise(Errc::domain_error, "active count exceeds width");
  if (active_value < 0) raise(Errc::domain_error, "active value must be >= 0");
  const double k = active_count;
  const double n = width;
  return active_value * std::sqrt(k * (n - k)) / n;
}

std::uint32_t classify_active(const OsdPattern& p, std::uint64_t threshold) {
  std::uint32_t active = 0;
  for (std::uint64_t c : p.counts)
    if (c > threshold) ++active;
  return active;
}

BalanceReport balance_report(std::span<const OsdPattern> patterns,
                             std::uint64_t threshold, SigmaEstimator estimator) {
  BalanceReport report;
  double sum_read = 0.0, sum_write = 0.0;
  std::map<std::uint32_t, std::uint64_t> hist_read, hist_write;
  for (const OsdPattern& p : patterns) {
    const double sigma = pattern_sigma(p, estimator);
    const std::uint32_t active = classify_active(p, threshold);
    if (p.op == OpKind::Read) {
      sum_read += sigma;
      report.read_patterns += 1;
      hist_read[active] += 1;
    } else if (p.op == OpKind::Write) {
      sum_write += sigma;
      report.write_patterns += 1;
      hist_write[active] += 1;
    }
  }
  if (report.read_patterns > 0) {
    report.avg_sigma_read = sum_read / static_cast<double>(report.read_patterns);
    for (const auto& [k, c] : hist_read)
      report.active_read[k] =
          static_cast<double>(c) / static_cast<double>(report.read_patterns);
  }
  if (report.write_patterns > 0) {
    report.avg_sigma_write =
        sum_write / static_cast<double>(report.write_patterns);
    for (const auto& [k, c] : hist_write)
      report.active_write[k] =
          static_cast<double>(c) / static_cast<double>(report.write_patterns);
  }
  return report;
}

}  // namespace itb
