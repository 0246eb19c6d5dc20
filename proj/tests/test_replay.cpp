// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "itb/replay.hpp"

using namespace itb;
using namespace itb::test;

namespace fs = std::filesystem;

namespace {

// Fresh scratch directory on a memory-backed filesystem when available.
struct ScratchDir {
  fs::path path;

  ScratchDir() {
    fs::path base = fs::exists("/dev/shm") ? "/dev/shm" : fs::temp_directory_path();
    std::string tmpl = (base / "itb-test-XXXXXX").string();
    char* made = ::mkdtemp(tmpl.data());
    REQUIRE(made != nullptr);
    path = made;
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// A small single-thread stream: open, n paced writes, close.
IoStream paced_stream(std::uint64_t nbytes, std::size_t ops, std::int64_t gap_ns,
                      std::int64_t resp_ns = 1'000'000) {
  std::vector<TraceEvent> events;
  std::int64_t now = 0;
  events.push_back(ev_open(1, 1, 3, "f.dat", now, now));
  for (std::size_t i = 0; i < ops; ++i) {
    now += gap_ns;
    events.push_back(ev_io(OpKind::Write, 1, 1, 3, nbytes, now, now + resp_ns));
    now += resp_ns;
  }
  now += 1;
  events.push_back(ev_close(1, 1, 3, now, now));
  return IoStream::build(0, std::move(events), RepairMode::strict);
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("draw_start_offsets: deterministic, in range, persistable") {
  auto a = draw_start_offsets(32, 7);
  auto b = draw_start_offsets(32, 7);
  CHECK(a == b);
  CHECK(draw_start_offsets(32, 8) != a);
  for (auto o : a) {
    CHECK(o >= 0);
    CHECK(o <= start_offset_window_ns);
  }

  ScratchDir dir;
  const std::string path = (dir.path / "offsets.txt").string();
  save_offsets_file(path, a);
  CHECK(load_offsets_file(path) == a);
}

TEST_CASE("prepare_tree: sizes files to the positions streams reach") {
  ScratchDir dir;
  ReplayPlan plan;
  plan.target_root = (dir.path / "root").string();

  // one file, max position 1 MiB
  {
    std::vector<TraceEvent> events;
    events.push_back(ev_open(1, 1, 3, "a/one.dat", 0, 1));
    events.push_back(ev_lseek(1, 1, 3, (1 << 20) - 4096, 2, 3));
    events.push_back(ev_io(OpKind::Read, 1, 1, 3, 4096, 4, 5));
    plan.streams.push_back(
        {IoStream::build(0, std::move(events), RepairMode::strict), 0});
  }
  // lseek to 10 MiB then a 4 KiB write
  {
    std::vector<TraceEvent> events;
    events.push_back(ev_open(1, 1, 3, "two.dat", 0, 1));
    events.push_back(ev_lseek(1, 1, 3, 10u << 20, 2, 3));
    events.push_back(ev_io(OpKind::Write, 1, 1, 3, 4096, 4, 5));
    plan.streams.push_back(
        {IoStream::build(1, std::move(events), RepairMode::strict), 0});
  }
  // a second stream sharing two.dat with a smaller requirement
  {
    std::vector<TraceEvent> events;
    events.push_back(ev_open(2, 1, 3, "two.dat", 0, 1));
    events.push_back(ev_io(OpKind::Write, 2, 1, 3, 512, 2, 3));
    plan.streams.push_back(
        {IoStream::build(2, std::move(events), RepairMode::strict), 0});
  }

  auto population = prepare_tree(plan);

  // Oracle: independent symbolic position replay per stream.
  std::map<std::string, std::uint64_t> oracle;
  for (const auto& entry : plan.streams) {
    std::map<std::int64_t, std::pair<std::string, std::uint64_t>> fds;
    for (const auto& e : entry.stream.events) {
      switch (e.op) {
        case OpKind::Open:
          fds[e.fd] = {*e.path, 0};
          oracle.insert({*e.path, 0});
          break;
        case OpKind::Lseek: {
          auto& [p, pos] = fds[e.fd];
          pos = *e.offset;
          oracle[p] = std::max(oracle[p], pos);
          break;
        }
        case OpKind::Read:
        case OpKind::Write: {
          auto& [p, pos] = fds[e.fd];
          pos += *e.nbytes;
          oracle[p] = std::max(oracle[p], pos);
          break;
        }
        default:
          break;
      }
    }
  }
  CHECK(population.sizes == oracle);
  CHECK(population.sizes.at("a/one.dat") == 1u << 20);
  CHECK(population.sizes.at("two.dat") == (10u << 20) + 4096);

  CHECK(fs::file_size(dir.path / "root/a/one.dat") == 1u << 20);
  CHECK(fs::file_size(dir.path / "root/two.dat") == (10u << 20) + 4096);
}

TEST_CASE("prepare_tree: dummy data is a pure function of the seed") {
  ScratchDir dir;
  ReplayPlan plan;
  plan.seed = 11;
  std::vector<TraceEvent> events;
  events.push_back(ev_open(1, 1, 3, "blob.bin", 0, 1));
  events.push_back(ev_io(OpKind::Read, 1, 1, 3, 64 << 10, 2, 3));
  auto stream = IoStream::build(0, std::move(events), RepairMode::strict);

  plan.target_root = (dir.path / "r1").string();
  plan.streams.push_back({stream, 0});
  prepare_tree(plan);
  auto first = file_bytes(dir.path / "r1/blob.bin");

  plan.target_root = (dir.path / "r2").string();
  prepare_tree(plan);
  CHECK(file_bytes(dir.path / "r2/blob.bin") == first);

  plan.seed = 12;
  plan.target_root = (dir.path / "r3").string();
  prepare_tree(plan);
  CHECK(file_bytes(dir.path / "r3/blob.bin") != first);
}

TEST_CASE("prepare_tree: path escapes are rejected") {
  ScratchDir dir;
  ReplayPlan plan;
  plan.target_root = (dir.path / "root").string();
  std::vector<TraceEvent> events;
  events.push_back(ev_open(1, 1, 3, "../evil.dat", 0, 1));
  events.push_back(ev_io(OpKind::Write, 1, 1, 3, 16, 2, 3));
  plan.streams.push_back(
      {IoStream::build(0, std::move(events), RepairMode::strict), 0});
  CHECK_THROWS_AS(prepare_tree(plan), Error);
}

TEST_CASE("replay: full pacing respects think gaps; fast pacing is quicker") {
  ScratchDir dir;
  ReplayPlan plan;
  plan.target_root = (dir.path / "root").string();
  plan.pacing = PacingMode::full();
  plan.streams.push_back({paced_stream(4096, 3, 50'000'000, 0), 0});
  prepare_tree(plan);

  auto log = replay(plan);
  REQUIRE(log.entries.size() == 5);
  for (const auto& e : log.entries) CHECK(e.error == 0);

  std::int64_t first_start = log.entries.front().actual_start_ns;
  std::int64_t last_end = 0;
  std::int64_t latency_sum = 0;
  for (const auto& e : log.entries) {
    last_end = std::max(last_end, e.actual_start_ns + e.latency_ns);
    latency_sum += e.latency_ns;
  }
  const std::int64_t duration = last_end - first_start;
  CHECK(duration >= 100'000'000 + latency_sum);

  plan.pacing = PacingMode::fast();
  auto fast_log = replay(plan);
  std::int64_t fast_end = 0;
  for (const auto& e : fast_log.entries)
    fast_end = std::max(fast_end, e.actual_start_ns + e.latency_ns);
  CHECK(fast_end - fast_log.entries.front().actual_start_ns < duration);
}

TEST_CASE("replay: per-thread order preserved, one entry per event") {
  ScratchDir dir;
  Rng rng(31);
  ReplayPlan plan;
  plan.target_root = (dir.path / "root").string();
  plan.pacing = PacingMode::fast();
  auto stream = random_stream(rng, 30);
  plan.streams.push_back({stream, 0});
  prepare_tree(plan);

  auto log = replay(plan);
  CHECK(log.entries.size() == stream.events.size());

  std::map<ThreadKey, std::vector<OpKind>> projected;
  for (const auto& e : log.entries) projected[{e.pid, e.tid}].push_back(e.op);
  for (const auto& [key, indices] : stream.threads) {
    std::vector<OpKind> expected;
    for (auto i : indices) expected.push_back(stream.events[i].op);
    CHECK(projected.at(key) == expected);
  }
}

TEST_CASE("replay: twelve concurrent single-thread streams") {
  ScratchDir dir;
  ReplayPlan plan;
  plan.target_root = (dir.path / "root").string();
  plan.pacing = PacingMode::fast();
  auto base = paced_stream(1024, 8, 1'000'000, 0);
  std::size_t expected = 0;
  for (std::uint32_t i = 0; i < 12; ++i) {
    plan.streams.push_back(
        {relabel_stream(base, i), static_cast<std::int64_t>(i) * 100'000});
    expected += base.events.size();
  }
  prepare_tree(plan);

  auto log = replay(plan);
  CHECK(log.entries.size() == expected);

  std::map<std::uint32_t, std::vector<OpKind>> per_stream;
  for (const auto& e : log.entries) per_stream[e.stream_id].push_back(e.op);
  REQUIRE(per_stream.size() == 12);
  std::vector<OpKind> expected_ops;
  for (const auto& e : base.events) expected_ops.push_back(e.op);
  for (auto& [id, ops] : per_stream) CHECK(ops == expected_ops);

  // Bytes moved match the recorded byte counts.
  for (const auto& e : log.entries) {
    CHECK(e.error == 0);
    CHECK(!e.short_io);
    if (e.op == OpKind::Write) CHECK(e.bytes == 1024);
  }
}

TEST_CASE("replay: op failures are recorded by default, raised in strict mode") {
  ScratchDir dir;
  ReplayPlan plan;
  plan.target_root = (dir.path / "root").string();
  plan.pacing = PacingMode::fast();
  plan.streams.push_back({paced_stream(512, 2, 0, 0), 0});
  // No prepare_tree: the target files are missing.

  auto log = replay(plan);
  REQUIRE(log.entries.size() == 4);
  bool saw_error = false;
  for (const auto& e : log.entries) saw_error = saw_error || e.error != 0;
  CHECK(saw_error);

  plan.strict = true;
  CHECK_THROWS_AS(replay(plan), Error);
}

TEST_CASE("replay: cancellation stops between ops") {
  ScratchDir dir;
  ReplayPlan plan;
  plan.target_root = (dir.path / "root").string();
  plan.pacing = PacingMode::full();
  plan.streams.push_back({paced_stream(256, 50, 20'000'000, 0), 0});
  prepare_tree(plan);

  CancelToken token;
  token.cancel();
  auto log = replay(plan, &token);
  CHECK(log.entries.empty());
}

TEST_CASE("replay log csv: round-trips entries and config echo") {
  ReplayLog log;
  log.wall_epoch_ns = 1234567890;
  ReplayEntry e;
  e.stream_id = 2;
  e.pid = 10;
  e.tid = 20;
  e.op = OpKind::Write;
  e.bytes = 4096;
  e.scheduled_start_ns = 1000;
  e.actual_start_ns = 1100;
  e.latency_ns = 900;
  log.entries.push_back(e);
  e.op = OpKind::Read;
  e.error = 5;
  log.entries.push_back(e);
  e.error = 0;
  e.short_io = true;
  log.entries.push_back(e);

  std::map<std::string, std::string> config{{"streams", "2"}, {"width", "4"}};
  std::ostringstream out;
  write_replay_log_csv(log, config, out);

  std::istringstream in(out.str());
  auto loaded = read_replay_log_csv(in);
  CHECK(loaded.log.wall_epoch_ns == log.wall_epoch_ns);
  CHECK(loaded.config == config);
  REQUIRE(loaded.log.entries.size() == 3);
  CHECK(loaded.log.entries[0].bytes == 4096);
  CHECK(loaded.log.entries[1].error == 5);
  CHECK(loaded.log.entries[2].short_io);
}
