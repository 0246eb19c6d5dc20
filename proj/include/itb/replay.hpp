// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "itb/trace.hpp"

namespace itb {

// How much of the recorded timing the replayer reproduces: the think time
// between consecutive ops of one thread, the skew of a thread's first op
// within its stream, and the stream start offset all scale together.
struct PacingMode {
  enum class Kind { full_think_time, scaled, as_fast_as_possible };
  Kind kind = Kind::full_think_time;
  double factor = 1.0;  // scaled only

  static PacingMode full() { return {Kind::full_think_time, 1.0}; }
  static PacingMode scaled(double f) { return {Kind::scaled, f}; }
  static PacingMode fast() { return {Kind::as_fast_as_possible, 0.0}; }
};

// Stream start offsets are drawn uniformly from [0, 300 s] and are a pure
// function of the seed, so a rerun reuses identical offsets. Sidecar files
// persist them across processes.
inline constexpr std::int64_t start_offset_window_ns = 300'000'000'000;

std::vector<std::int64_t> draw_start_offsets(std::size_t n, std::uint64_t seed);
std::vector<std::int64_t> load_offsets_file(const std::string& path);
void save_offsets_file(const std::string& path,
                       const std::vector<std::int64_t>& offsets);

struct ReplayPlan {
  struct Entry {
    IoStream stream;
    std::int64_t start_offset_ns = 0;
  };

  std::vector<Entry> streams;
  std::string target_root;
  bool sync_writes = false;  // open files with O_SYNC
  PacingMode pacing = PacingMode::full();
  std::uint64_t seed = 0;    // dummy-data generation
  bool strict = false;       // fail fast on op errors instead of recording
  std::size_t max_workers = 512;
  // Recorded pids map to replay worker threads by default. This flag forks
  // one OS process per recorded (stream instance, pid) instead, with that
  // pid's threads running inside it. Ordering semantics are identical; in
  // strict mode each process stops on its own first error.
  bool process_per_pid = false;
};

// Recorded paths mapped into the target tree, sized to the highest byte
// position any stream reaches on them.
struct FilePopulation {
  std::map<std::string, std::uint64_t> sizes;  // recorded path -> bytes
};

// Creates the directory tree under plan.target_root and fills every file
// with pseudo-random bytes derived from (plan.seed, path). Existing files
// are rewritten so reruns start from identical content.
FilePopulation prepare_tree(const ReplayPlan& plan);

// One executed op. Times are nanoseconds relative to the run epoch.
struct ReplayEntry {
  std::uint32_t stream_id = 0;
  std::int64_t pid = 0;
  std::int64_t tid = 0;
  OpKind op = OpKind::Meta;
  std::uint64_t bytes = 0;  // bytes actually moved
  std::int64_t scheduled_start_ns = 0;
  std::int64_t actual_start_ns = 0;
  std::int64_t latency_ns = 0;
  int error = 0;        // errno, 0 when the op succeeded
  bool short_io = false;  // fewer bytes than recorded were moved
};

struct ReplayLog {
  std::int64_t wall_epoch_ns = 0;  // system clock at the run epoch
  std::vector<ReplayEntry> entries;  // grouped per thread, trace order within
};

// Cooperative stop signal, honored between ops.
class CancelToken {
 public:
  void cancel() { flag_.store(true, std::memory_order_relaxed); }
  bool cancelled() const { return flag_.load(std::memory_order_relaxed); }

 private:
  std::atomic<bool> flag_{false};
};

// Replays every stream of the plan with one worker per recorded (pid, tid).
// Workers issue their thread's ops strictly in trace order, wait the paced
// think gap after each completion, and never synchronize with each other.
// Op failures are recorded and skipped unless plan.strict is set, in which
// case the run stops and raises target_io_error.
ReplayLog replay(const ReplayPlan& plan, CancelToken* cancel = nullptr);

// Log CSV: comment header ("# key=value"; epoch_ns plus the config echo),
// one fixed 9-column header row, one row per entry.
void write_replay_log_csv(const ReplayLog& log,
                          const std::map<std::string, std::string>& config,
                          std::ostream& out);

struct LoadedLog {
  ReplayLog log;
  std::map<std::string, std::string> config;
};

LoadedLog read_replay_log_csv(std::istream& in);
LoadedLog read_replay_log_file(const std::string& path);

}  // namespace itb
