// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "itb/error.hpp"

namespace itb {

// The six operation kinds a trace can carry. Meta covers metadata operations
// that are counted in workload statistics but not replayed byte-for-byte.
enum class OpKind : std::uint8_t { Open, Close, Read, Write, Lseek, Meta };

inline constexpr std::size_t op_kind_count = 6;

const char* op_kind_name(OpKind k);
std::optional<OpKind> op_kind_from_name(std::string_view name);
inline std::size_t op_index(OpKind k) { return static_cast<std::size_t>(k); }

// One recorded IO operation.
//
// Field presence depends on the kind:
//   Open        fd + path
//   Close, Meta fd
//   Read, Write fd + nbytes
//   Lseek       fd + offset (absolute seek target)
// Timestamps are integer nanoseconds since the trace epoch, t_end >= t_start.
// fd is an opaque label, meaningful only within one (stream_id, pid).
struct TraceEvent {
  std::uint32_t stream_id = 0;
  std::int64_t pid = 0;
  std::int64_t tid = 0;
  OpKind op = OpKind::Meta;
  std::int64_t fd = 0;
  std::optional<std::string> path;    // Open only
  std::optional<std::uint64_t> offset; // Lseek only
  std::optional<std::uint64_t> nbytes; // Read/Write only
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;

  std::int64_t response_time() const { return t_end - t_start; }

  bool operator==(const TraceEvent&) const = default;
};

// Returns the name of the first field violating the per-kind presence rules,
// or nullptr if the event is well formed.
const char* event_schema_violation(const TraceEvent& e);

using ThreadKey = std::pair<std::int64_t, std::int64_t>;  // (pid, tid)

// Repair policy for streams whose raw events violate the invariants.
//  - repair: an event referencing an fd with no live open gets a synthetic
//    Open against "orphan-<fd>" inserted at its start time; an event starting
//    before its thread predecessor ended has t_start clamped forward.
//  - strict: those conditions raise orphan_fd / non_monotone_thread instead.
enum class RepairMode { repair, strict };

// An ordered event sequence with its per-thread partition.
//
// events are sorted by t_start, stable on construction order for ties.
// Within each (pid, tid) partition events do not overlap in time.
class IoStream {
 public:
  std::uint32_t stream_id = 0;
  std::vector<TraceEvent> events;
  std::map<ThreadKey, std::vector<std::size_t>> threads;

  // Establishes all invariants from raw events (sorting, fd repair, overlap
  // repair, thread partition). `lines`, when given, maps each raw event to
  // its source line for error reporting; it must match events in length.
  static IoStream build(std::uint32_t stream_id, std::vector<TraceEvent> events,
                        RepairMode mode = RepairMode::repair,
                        std::span<const std::size_t> lines = {});

  bool operator==(const IoStream& other) const {
    return stream_id == other.stream_id && events == other.events;
  }
};

// Per-thread gaps between consecutive operations: gap[i] is the time from
// event i's completion to event i+1's start, never negative.
struct ThinkTimeProfile {
  std::map<ThreadKey, std::vector<std::int64_t>> gaps;

  std::vector<std::int64_t> all_gaps() const;
};

ThinkTimeProfile derive_think_times(const IoStream& stream);

// Aggregate op-mix and payload statistics of a stream.
struct WorkloadProfile {
  struct PerKind {
    std::uint64_t count = 0;
    double fraction = 0.0;
    std::uint64_t total_bytes = 0;
    std::optional<double> mean_bytes;  // Read/Write only, absent if count == 0
  };

  std::array<PerKind, op_kind_count> kinds;
  std::uint64_t total_events = 0;

  const PerKind& operator[](OpKind k) const { return kinds[op_index(k)]; }
};

WorkloadProfile characterize(const IoStream& stream);  // empty_trace if empty

// Calls `fn(event_index, path, offset)` for every Read/Write with the byte
// offset it lands on, reconstructed from the implicit file-position model:
// position starts at 0 on open, lseek sets it, reads/writes advance it.
// Positions are tracked per (pid, fd) since fds are process-wide.
template <typename Fn>
void walk_positions(const IoStream& stream, Fn&& fn);

// Highest byte position each path must cover so every recorded operation on
// it stays inside the file (seek targets included).
std::map<std::string, std::uint64_t> file_extents(const IoStream& stream);

// Copy with a different stream id (applied to every event). Superposing N
// instances of one trace relabels them 0..N-1 so log projections stay
// unambiguous.
IoStream relabel_stream(IoStream stream, std::uint32_t stream_id);

// ---- implementation ----

template <typename Fn>
void walk_positions(const IoStream& stream, Fn&& fn) {
  struct FdState {
    std::string path;
    std::uint64_t pos = 0;
  };
  std::map<std::pair<std::int64_t, std::int64_t>, FdState> open_fds;
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const TraceEvent& e = stream.events[i];
    auto key = std::make_pair(e.pid, e.fd);
    switch (e.op) {
      case OpKind::Open:
        open_fds[key] = FdState{e.path ? *e.path : std::string(), 0};
        break;
      case OpKind::Close:
        open_fds.erase(key);
        break;
      case OpKind::Lseek: {
        auto it = open_fds.find(key);
        if (it == open_fds.end())
          it = open_fds.emplace(key, FdState{"orphan-" + std::to_string(e.fd), 0}).first;
        it->second.pos = e.offset.value_or(0);
        break;
      }
      case OpKind::Read:
      case OpKind::Write: {
        auto it = open_fds.find(key);
        if (it == open_fds.end())
          it = open_fds.emplace(key, FdState{"orphan-" + std::to_string(e.fd), 0}).first;
        fn(i, std::string_view(it->second.path), it->second.pos);
        it->second.pos += e.nbytes.value_or(0);
        break;
      }
      case OpKind::Meta:
        break;
    }
  }
}

}  // namespace itb
