// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "itb/trace.hpp"

namespace itb {

// Payload-size distribution for reads or writes, in bytes.
struct SizeModel {
  enum class Kind { constant, uniform, lognormal };
  Kind kind = Kind::constant;
  double a = 4096;  // constant: value; uniform: low; lognormal: mu
  double b = 0;     // uniform: high; lognormal: sigma

  static SizeModel constant(double bytes) { return {Kind::constant, bytes, 0}; }
  static SizeModel uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
  static SizeModel lognormal(double mu, double sigma) {
    return {Kind::lognormal, mu, sigma};
  }
  bool operator==(const SizeModel&) const = default;
};

// Think-time distribution between consecutive ops of one thread, nanoseconds.
struct ThinkModel {
  enum class Kind { constant, exponential, empirical };
  Kind kind = Kind::constant;
  double a = 0;                     // constant: gap; exponential: mean
  std::vector<std::int64_t> gaps;  // empirical: resampled verbatim

  static ThinkModel constant(double ns) { return {Kind::constant, ns, {}}; }
  static ThinkModel exponential(double mean_ns) {
    return {Kind::exponential, mean_ns, {}};
  }
  static ThinkModel empirical(std::vector<std::int64_t> gaps) {
    return {Kind::empirical, 0, std::move(gaps)};
  }
  bool operator==(const ThinkModel&) const = default;
};

// Everything the generator needs. op_mix entries for Open and Close must be
// zero: the generator frames each thread's activity with one open per file
// up front and matching closes at the end, so every read/write fd has a
// generating open and a terminating close.
struct GenSpec {
  std::array<double, op_kind_count> op_mix{};  // indexed by op_index()
  SizeModel read_size = SizeModel::constant(4096);
  SizeModel write_size = SizeModel::constant(4096);
  ThinkModel think = ThinkModel::constant(0);
  std::uint64_t n_files = 4;
  std::uint64_t file_size_bytes = 16ull << 20;
  std::uint64_t n_threads = 1;
  std::uint64_t n_events = 1000;
  std::uint64_t seed = 1;

  void validate() const;  // raises invalid_spec
  bool operator==(const GenSpec&) const = default;
};

// The bundled profile modeled on a write-heavy database initialization
// workload: op mix read/write/lseek/meta = 14389/302201/312752/2627,
// lognormal sizes with means 6884 B (read) and 7995 B (write).
GenSpec maxdb_init_spec();

// Resolves a --spec argument: the builtin name above or a key=value file.
GenSpec load_gen_spec(const std::string& name_or_path);
GenSpec parse_gen_spec(std::istream& in);

// Applies one "key=value" setting; raises invalid_spec on unknown keys or
// unparsable values. Used by both the file loader and the CLI flags.
void apply_spec_setting(GenSpec& spec, const std::string& key,
                        const std::string& value);

std::string format_gen_spec(const GenSpec& spec);

// Deterministic synthesis: the same spec (seed included) yields a
// byte-identical serialized stream. Output always satisfies strict-mode
// stream invariants.
IoStream generate(const GenSpec& spec);

}  // namespace itb
