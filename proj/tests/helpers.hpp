// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#pragma once

#include <string>
#include <vector>

#include "itb/rng.hpp"
#include "itb/trace.hpp"

namespace itb::test {

inline TraceEvent ev_open(std::int64_t pid, std::int64_t tid, std::int64_t fd,
                          std::string path, std::int64_t t0, std::int64_t t1) {
  TraceEvent e;
  e.pid = pid;
  e.tid = tid;
  e.op = OpKind::Open;
  e.fd = fd;
  e.path = std::move(path);
  e.t_start = t0;
  e.t_end = t1;
  return e;
}

inline TraceEvent ev_close(std::int64_t pid, std::int64_t tid, std::int64_t fd,
                           std::int64_t t0, std::int64_t t1) {
  TraceEvent e;
  e.pid = pid;
  e.tid = tid;
  e.op = OpKind::Close;
  e.fd = fd;
  e.t_start = t0;
  e.t_end = t1;
  return e;
}

inline TraceEvent ev_io(OpKind op, std::int64_t pid, std::int64_t tid,
                        std::int64_t fd, std::uint64_t nbytes, std::int64_t t0,
                        std::int64_t t1) {
  TraceEvent e;
  e.pid = pid;
  e.tid = tid;
  e.op = op;
  e.fd = fd;
  e.nbytes = nbytes;
  e.t_start = t0;
  e.t_end = t1;
  return e;
}

inline TraceEvent ev_lseek(std::int64_t pid, std::int64_t tid, std::int64_t fd,
                           std::uint64_t offset, std::int64_t t0, std::int64_t t1) {
  TraceEvent e;
  e.pid = pid;
  e.tid = tid;
  e.op = OpKind::Lseek;
  e.fd = fd;
  e.offset = offset;
  e.t_start = t0;
  e.t_end = t1;
  return e;
}

inline TraceEvent ev_meta(std::int64_t pid, std::int64_t tid, std::int64_t fd,
                          std::int64_t t0, std::int64_t t1) {
  TraceEvent e;
  e.pid = pid;
  e.tid = tid;
  e.op = OpKind::Meta;
  e.fd = fd;
  e.t_start = t0;
  e.t_end = t1;
  return e;
}

// Builds a structurally valid random stream: per-thread monotone times,
// proper open/use/close fd lifecycles, awkward paths included. Independent
// of the synthetic generator on purpose.
inline IoStream random_stream(Rng& rng, std::size_t max_events_per_thread = 40,
                              std::uint32_t stream_id = 0) {
  static const std::vector<std::string> path_pool = {
      "data/file0.dat",  "db/volume1.db",      "plain.bin",
      "with space.dat",  "comma,inside.dat",   "quote\"inside.dat",
      "nested/a/b/c.d",  "\xD0\xB4\xD0\xB0\xD0\xBD.db",
  };
  std::vector<TraceEvent> events;
  const std::size_t n_threads = 1 + rng.below(4);
  for (std::size_t t = 0; t < n_threads; ++t) {
    const std::int64_t pid = 100 + static_cast<std::int64_t>(rng.below(2));
    const std::int64_t tid = 1000 + static_cast<std::int64_t>(t);
    std::int64_t now = static_cast<std::int64_t>(rng.below(1'000'000));
    // A disjoint fd range per thread keeps pid-level fd lifecycles sane even
    // when two threads share a pid.
    const std::int64_t fd_base = 3 + static_cast<std::int64_t>(t) * 8;
    std::vector<std::int64_t> open_fds;
    auto advance = [&](std::int64_t& t0, std::int64_t& t1) {
      t0 = now + static_cast<std::int64_t>(rng.below(50'000));
      t1 = t0 + static_cast<std::int64_t>(rng.below(20'000));
      now = t1;
    };
    const std::size_t n_files = 1 + rng.below(3);
    for (std::size_t f = 0; f < n_files; ++f) {
      std::int64_t t0, t1;
      advance(t0, t1);
      events.push_back(ev_open(pid, tid, fd_base + static_cast<std::int64_t>(f),
                               path_pool[rng.below(path_pool.size())], t0, t1));
      open_fds.push_back(fd_base + static_cast<std::int64_t>(f));
    }
    const std::size_t n_ops = 1 + rng.below(max_events_per_thread);
    for (std::size_t i = 0; i < n_ops; ++i) {
      std::int64_t t0, t1;
      advance(t0, t1);
      std::int64_t fd = open_fds[rng.below(open_fds.size())];
      switch (rng.below(4)) {
        case 0:
          events.push_back(ev_io(OpKind::Read, pid, tid, fd, rng.below(65536), t0, t1));
          break;
        case 1:
          events.push_back(ev_io(OpKind::Write, pid, tid, fd, rng.below(65536), t0, t1));
          break;
        case 2:
          events.push_back(ev_lseek(pid, tid, fd, rng.below(1'000'000), t0, t1));
          break;
        default:
          events.push_back(ev_meta(pid, tid, fd, t0, t1));
          break;
      }
    }
    for (std::int64_t fd : open_fds) {
      std::int64_t t0, t1;
      advance(t0, t1);
      events.push_back(ev_close(pid, tid, fd, t0, t1));
    }
  }
  return IoStream::build(stream_id, std::move(events), RepairMode::strict);
}

}  // namespace itb::test
