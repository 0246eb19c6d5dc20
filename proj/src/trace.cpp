// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#include "itb/trace.hpp"

#include <algorithm>

namespace itb {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::malformed_line: return "MalformedLine";
    case Errc::schema_violation: return "SchemaViolation";
    case Errc::non_monotone_thread: return "NonMonotoneThread";
    case Errc::orphan_fd: return "OrphanFd";
    case Errc::empty_trace: return "EmptyTrace";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::insufficient_space: return "InsufficientSpace";
    case Errc::permission_denied: return "PermissionDenied";
    case Errc::target_io_error: return "TargetIoError";
    case Errc::clock_skew: return "ClockSkew";
    case Errc::position_underflow: return "PositionUnderflow";
    case Errc::domain_error: return "DomainError";
    case Errc::empty_log: return "EmptyLog";
    case Errc::mismatched_configs: return "MismatchedConfigs";
    case Errc::io_error: return "IoError";
  }
  return "UnknownError";
}

const char* op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::Open: return "open";
    case OpKind::Close: return "close";
    case OpKind::Read: return "read";
    case OpKind::Write: return "write";
    case OpKind::Lseek: return "lseek";
    case OpKind::Meta: return "meta";
  }
  return "?";
}

std::optional<OpKind> op_kind_from_name(std::string_view name) {
  if (name == "open") return OpKind::Open;
  if (name == "close") return OpKind::Close;
  if (name == "read") return OpKind::Read;
  if (name == "write") return OpKind::Write;
  if (name == "lseek") return OpKind::Lseek;
  if (name == "meta") return OpKind::Meta;
  return std::nullopt;
}

const char* event_schema_violation(const TraceEvent& e) {
  const bool wants_path = e.op == OpKind::Open;
  const bool wants_offset = e.op == OpKind::Lseek;
  const bool wants_nbytes = e.op == OpKind::Read || e.op == OpKind::Write;
  if (e.path.has_value() != wants_path) return "path";
  if (e.offset.has_value() != wants_offset) return "offset";
  if (e.nbytes.has_value() != wants_nbytes) return "nbytes";
  if (e.t_start < 0) return "t_start";
  if (e.t_end < e.t_start) return "t_end";
  return nullptr;
}

namespace {

std::size_t source_line(std::span<const std::size_t> lines, std::size_t index) {
  return index < lines.size() ? lines[index] : index;
}

}  // namespace

IoStream IoStream::build(std::uint32_t stream_id, std::vector<TraceEvent> events,
                         RepairMode mode, std::span<const std::size_t> lines) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (const char* field = event_schema_violation(events[i]))
      raise(Errc::schema_violation,
            "event " + std::to_string(source_line(lines, i)) + " field " + field);
    events[i].stream_id = stream_id;
  }

  // Sort by start time; ties keep input order.
  std::vector<std::size_t> source_lines(lines.begin(), lines.end());
  {
    std::vector<std::size_t> order(events.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return events[a].t_start < events[b].t_start;
    });
    std::vector<TraceEvent> sorted;
    sorted.reserve(events.size());
    std::vector<std::size_t> sorted_lines;
    sorted_lines.reserve(source_lines.size());
    for (std::size_t i : order) {
      sorted.push_back(std::move(events[i]));
      if (!source_lines.empty()) sorted_lines.push_back(source_lines[i]);
    }
    events = std::move(sorted);
    source_lines = std::move(sorted_lines);
  }

  // fd liveness per (pid, fd), evaluated in time order. A reference to a dead
  // fd either raises (strict) or synthesizes a zero-length Open right before
  // the offending event; capture windows routinely truncate open sessions.
  std::map<std::pair<std::int64_t, std::int64_t>, bool> live;
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto key = std::make_pair(events[i].pid, events[i].fd);
    if (events[i].op == OpKind::Open) {
      live[key] = true;
      continue;
    }
    if (!live[key]) {
      if (mode == RepairMode::strict)
        raise(Errc::orphan_fd,
              "fd " + std::to_string(events[i].fd) + " used without open at event " +
                  std::to_string(source_line({source_lines.data(), source_lines.size()}, i)));
      TraceEvent synth;
      synth.stream_id = stream_id;
      synth.pid = events[i].pid;
      synth.tid = events[i].tid;
      synth.op = OpKind::Open;
      synth.fd = events[i].fd;
      synth.path = "orphan-" + std::to_string(events[i].fd);
      synth.t_start = events[i].t_start;
      synth.t_end = events[i].t_start;
      events.insert(events.begin() + static_cast<std::ptrdiff_t>(i), synth);
      if (!source_lines.empty())
        source_lines.insert(source_lines.begin() + static_cast<std::ptrdiff_t>(i),
                            source_lines[i]);
      live[key] = true;
      ++i;  // the offending event moved to i
    }
    if (events[i].op == OpKind::Close) live[key] = false;
  }

  // Per-thread overlap: clamp (repair) or reject (strict). Clock granularity
  // in interception tools produces small overlaps on busy threads.
  bool clamped = false;
  {
    std::map<ThreadKey, std::pair<std::int64_t, std::size_t>> prev_end;  // (t_end, count)
    for (std::size_t i = 0; i < events.size(); ++i) {
      TraceEvent& e = events[i];
      auto key = std::make_pair(e.pid, e.tid);
      auto it = prev_end.find(key);
      if (it != prev_end.end() && e.t_start < it->second.first) {
        if (mode == RepairMode::strict)
          raise(Errc::non_monotone_thread,
                "thread " + std::to_string(e.tid) + " event " +
                    std::to_string(it->second.second) + " overlaps predecessor");
        e.t_start = it->second.first;
        if (e.t_end < e.t_start) e.t_end = e.t_start;
        clamped = true;
      }
      auto& slot = prev_end[key];
      slot.first = e.t_end;
      slot.second += 1;
    }
  }
  if (clamped) {
    // Clamping moves starts forward; restore the global ordering. Per-thread
    // starts are non-decreasing after the pass, so stability preserves
    // thread-local order.
    std::stable_sort(events.begin(), events.end(),
                     [](const TraceEvent& a, const TraceEvent& b) {
                       return a.t_start < b.t_start;
                     });
  }

  IoStream s;
  s.stream_id = stream_id;
  s.events = std::move(events);
  for (std::size_t i = 0; i < s.events.size(); ++i)
    s.threads[{s.events[i].pid, s.events[i].tid}].push_back(i);
  return s;
}

std::vector<std::int64_t> ThinkTimeProfile::all_gaps() const {
  std::vector<std::int64_t> out;
  for (const auto& [key, g] : gaps) out.insert(out.end(), g.begin(), g.end());
  return out;
}

ThinkTimeProfile derive_think_times(const IoStream& stream) {
  ThinkTimeProfile profile;
  for (const auto& [key, idx] : stream.threads) {
    auto& gaps = profile.gaps[key];
    gaps.reserve(idx.size() > 0 ? idx.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
      const TraceEvent& cur = stream.events[idx[i]];
      const TraceEvent& next = stream.events[idx[i + 1]];
      gaps.push_back(next.t_start - cur.t_end);
    }
  }
  return profile;
}

WorkloadProfile characterize(const IoStream& stream) {
  if (stream.events.empty()) raise(Errc::empty_trace, "stream has no events");
  WorkloadProfile p;
  p.total_events = stream.events.size();
  for (const TraceEvent& e : stream.events) {
    auto& k = p.kinds[op_index(e.op)];
    k.count += 1;
    if (e.nbytes) k.total_bytes += *e.nbytes;
  }
  for (std::size_t i = 0; i < op_kind_count; ++i) {
    auto& k = p.kinds[i];
    k.fraction = static_cast<double>(k.count) / static_cast<double>(p.total_events);
    OpKind kind = static_cast<OpKind>(i);
    if ((kind == OpKind::Read || kind == OpKind::Write) && k.count > 0)
      k.mean_bytes = static_cast<double>(k.total_bytes) / static_cast<double>(k.count);
  }
  return p;
}

IoStream relabel_stream(IoStream stream, std::uint32_t stream_id) {
  stream.stream_id = stream_id;
  for (auto& e : stream.events) e.stream_id = stream_id;
  return stream;
}

std::map<std::string, std::uint64_t> file_extents(const IoStream& stream) {
  struct FdState {
    std::string path;
    std::uint64_t pos = 0;
  };
  std::map<std::string, std::uint64_t> extents;
  std::map<std::pair<std::int64_t, std::int64_t>, FdState> open_fds;
  auto touch = [&](const std::string& path, std::uint64_t end) {
    auto& slot = extents[path];
    slot = std::max(slot, end);
  };
  for (const TraceEvent& e : stream.events) {
    auto key = std::make_pair(e.pid, e.fd);
    switch (e.op) {
      case OpKind::Open:
        open_fds[key] = FdState{e.path ? *e.path : std::string(), 0};
        touch(open_fds[key].path, 0);
        break;
      case OpKind::Close:
        open_fds.erase(key);
        break;
      case OpKind::Lseek: {
        auto it = open_fds.find(key);
        if (it == open_fds.end())
          it = open_fds.emplace(key, FdState{"orphan-" + std::to_string(e.fd), 0}).first;
        it->second.pos = e.offset.value_or(0);
        touch(it->second.path, it->second.pos);
        break;
      }
      case OpKind::Read:
      case OpKind::Write: {
        auto it = open_fds.find(key);
        if (it == open_fds.end())
          it = open_fds.emplace(key, FdState{"orphan-" + std::to_string(e.fd), 0}).first;
        it->second.pos += e.nbytes.value_or(0);
        touch(it->second.path, it->second.pos);
        break;
      }
      case OpKind::Meta:
        break;
    }
  }
  return extents;
}

}  // namespace itb
