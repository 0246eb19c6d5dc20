// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#include "itb/replay.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "itb/rng.hpp"

namespace itb {

namespace fs = std::filesystem;

std::vector<std::int64_t> draw_start_offsets(std::size_t n, std::uint64_t seed) {
  Rng rng(mix64(seed) ^ 0x5747A27ULL);
  std::vector<std::int64_t> offsets(n);
  for (auto& o : offsets)
    o = static_cast<std::int64_t>(
        rng.below(static_cast<std::uint64_t>(start_offset_window_ns) + 1));
  return offsets;
}

std::vector<std::int64_t> load_offsets_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open offsets file " + path);
  std::vector<std::int64_t> offsets;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || p != line.data() + line.size() || v < 0)
      raise(Errc::io_error, "bad offset line '" + line + "' in " + path);
    offsets.push_back(v);
  }
  return offsets;
}

void save_offsets_file(const std::string& path,
                       const std::vector<std::int64_t>& offsets) {
  std::ofstream out(path);
  if (!out) raise(Errc::io_error, "cannot write offsets file " + path);
  out << "# stream start offsets, nanoseconds\n";
  for (auto o : offsets) out << o << '\n';
}

namespace {

[[noreturn]] void raise_fs_error(int err, const std::string& what) {
  if (err == ENOSPC) raise(Errc::insufficient_space, what);
  if (err == EACCES || err == EPERM) raise(Errc::permission_denied, what);
  raise(Errc::io_error, what + ": " + std::strerror(err));
}

// Recorded paths live under the target root; absolute paths lose their
// leading slash, dot segments collapse, escapes are rejected.
std::string map_path(const std::string& root, const std::string& recorded) {
  fs::path rel;
  for (const auto& part : fs::path(recorded).relative_path()) {
    if (part == ".") continue;
    if (part == "..")
      raise(Errc::invalid_spec, "recorded path escapes the target root: " + recorded);
    rel /= part;
  }
  if (rel.empty()) rel = "_";
  return (fs::path(root) / rel).string();
}

void fill_file(const std::string& path, std::uint64_t size, std::uint64_t seed) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) raise_fs_error(errno, "create " + path);
  std::vector<std::uint64_t> buf((1 << 20) / sizeof(std::uint64_t));
  Rng rng(seed);
  std::uint64_t written = 0;
  while (written < size) {
    for (auto& word : buf) word = rng.next_u64();
    const std::uint64_t chunk =
        std::min<std::uint64_t>(size - written, buf.size() * sizeof(std::uint64_t));
    std::uint64_t done = 0;
    while (done < chunk) {
      const ssize_t n = ::write(fd, reinterpret_cast<const char*>(buf.data()) + done,
                                chunk - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        const int err = errno;
        ::close(fd);
        raise_fs_error(err, "write " + path);
      }
      done += static_cast<std::uint64_t>(n);
    }
    written += chunk;
  }
  ::close(fd);
}

}  // namespace

FilePopulation prepare_tree(const ReplayPlan& plan) {
  FilePopulation population;
  for (const auto& entry : plan.streams) {
    for (const auto& [path, extent] : file_extents(entry.stream)) {
      auto& size = population.sizes[path];
      size = std::max(size, extent);
    }
  }
  std::error_code ec;
  fs::create_directories(plan.target_root, ec);
  if (ec) raise_fs_error(ec.value(), "create " + plan.target_root);
  for (const auto& [path, size] : population.sizes) {
    const std::string target = map_path(plan.target_root, path);
    fs::create_directories(fs::path(target).parent_path(), ec);
    if (ec) raise_fs_error(ec.value(), "create parents of " + target);
    fill_file(target, size,
              mix64(plan.seed) ^ hash_bytes(path.data(), path.size()));
  }
  return population;
}

namespace {

using steady = std::chrono::steady_clock;

std::int64_t ns_between(steady::time_point a, steady::time_point b) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count();
}

std::int64_t pace(const PacingMode& mode, std::int64_t gap_ns) {
  switch (mode.kind) {
    case PacingMode::Kind::full_think_time:
      return gap_ns;
    case PacingMode::Kind::scaled:
      return static_cast<std::int64_t>(
          std::max(0.0, mode.factor * static_cast<double>(gap_ns)));
    case PacingMode::Kind::as_fast_as_possible:
      return 0;
  }
  return 0;
}

// One open-file slot, shared by all workers of a (stream instance, pid).
// A worker touching a not-yet-open slot opens it on demand: threads race
// freely by design, so the trace-time open may not have happened yet.
struct FdSlot {
  std::mutex mutex;
  int fd = -1;
  std::string target_path;

  int ensure_open(bool sync_writes, int* err) {
    std::lock_guard<std::mutex> lock(mutex);
    if (fd >= 0) return fd;
    int flags = O_RDWR;
    if (sync_writes) flags |= O_SYNC;
    fd = ::open(target_path.c_str(), flags);
    if (fd < 0 && err) *err = errno;
    return fd;
  }

  void close_slot() {
    std::lock_guard<std::mutex> lock(mutex);
    if (fd >= 0) {
      ::close(fd);
      fd = -1;
    }
  }

  ~FdSlot() {
    if (fd >= 0) ::close(fd);
  }
};

struct InstancePlan {
  const IoStream* stream = nullptr;
  std::int64_t start_offset_ns = 0;
  std::int64_t t0 = 0;  // first recorded start in the stream
  std::vector<std::unique_ptr<FdSlot>> slots;
  std::vector<std::uint32_t> event_slot;  // event index -> slot
};

struct WorkerTask {
  const InstancePlan* instance = nullptr;
  std::size_t instance_index = 0;
  const std::vector<std::size_t>* thread_events = nullptr;
  std::int64_t pid = 0;
};

// Set by SIGTERM in forked replay processes; polled between ops.
volatile std::sig_atomic_t g_terminate = 0;

void handle_terminate(int) { g_terminate = 1; }

struct OpResult {
  std::uint64_t bytes = 0;
  int error = 0;
  bool short_io = false;
};

OpResult run_read(int fd, std::uint64_t nbytes, std::vector<char>& buf) {
  OpResult r;
  while (r.bytes < nbytes) {
    const std::size_t chunk = static_cast<std::size_t>(
        std::min<std::uint64_t>(nbytes - r.bytes, buf.size()));
    const ssize_t n = ::read(fd, buf.data(), chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      r.error = errno;
      return r;
    }
    if (n == 0) {  // end of file before the recorded byte count
      r.short_io = true;
      return r;
    }
    r.bytes += static_cast<std::uint64_t>(n);
  }
  return r;
}

OpResult run_write(int fd, std::uint64_t nbytes, const std::vector<char>& buf) {
  OpResult r;
  while (r.bytes < nbytes) {
    const std::size_t chunk = static_cast<std::size_t>(
        std::min<std::uint64_t>(nbytes - r.bytes, buf.size()));
    const ssize_t n = ::write(fd, buf.data(), chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      r.error = errno;
      return r;
    }
    if (n == 0) {
      r.short_io = true;
      return r;
    }
    r.bytes += static_cast<std::uint64_t>(n);
  }
  return r;
}

// Process-per-pid execution: one fork per (stream instance, pid) running
// that pid's worker threads, results handed back through per-child files.
template <typename Worker>
void run_tasks_in_processes(const std::vector<WorkerTask>& tasks,
                            Worker&& worker,
                            std::vector<std::vector<ReplayEntry>>& worker_logs,
                            std::atomic<bool>& skew, CancelToken* token) {
  std::map<std::pair<std::size_t, std::int64_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    groups[{tasks[i].instance_index, tasks[i].pid}].push_back(i);

  struct Child {
    pid_t pid = -1;
    std::string file;
    bool done = false;
  };
  std::vector<Child> children;
  children.reserve(groups.size());

  std::size_t group_no = 0;
  for (const auto& [key, task_indices] : groups) {
    std::string file =
        (fs::temp_directory_path() /
         ("itb-proc-" + std::to_string(::getpid()) + "-" +
          std::to_string(group_no++) + ".bin"))
            .string();
    const pid_t child = ::fork();
    if (child < 0) raise_fs_error(errno, "fork replay process");
    if (child == 0) {
      std::signal(SIGTERM, handle_terminate);
      {
        std::vector<std::thread> threads;
        threads.reserve(task_indices.size());
        for (std::size_t ti : task_indices) threads.emplace_back(worker, ti);
        for (auto& t : threads) t.join();
      }
      int code = 0;
      {
        std::ofstream out(file, std::ios::binary);
        const std::uint8_t skew_flag = skew.load() ? 1 : 0;
        out.write(reinterpret_cast<const char*>(&skew_flag), 1);
        for (std::size_t ti : task_indices) {
          const std::uint64_t index = ti;
          const std::uint64_t count = worker_logs[ti].size();
          out.write(reinterpret_cast<const char*>(&index), sizeof index);
          out.write(reinterpret_cast<const char*>(&count), sizeof count);
          out.write(reinterpret_cast<const char*>(worker_logs[ti].data()),
                    static_cast<std::streamsize>(count * sizeof(ReplayEntry)));
        }
        out.flush();
        if (!out.good()) code = 3;
      }
      std::_Exit(code);
    }
    children.push_back({child, file, false});
  }

  bool failed = false;
  bool signalled = false;
  std::size_t remaining = children.size();
  while (remaining > 0) {
    if (!signalled && token && token->cancelled()) {
      for (const auto& c : children) ::kill(c.pid, SIGTERM);
      signalled = true;
    }
    bool progressed = false;
    for (auto& c : children) {
      if (c.done) continue;
      int status = 0;
      const pid_t r = ::waitpid(c.pid, &status, WNOHANG);
      if (r == c.pid) {
        c.done = true;
        --remaining;
        progressed = true;
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) failed = true;
      }
    }
    if (!progressed && remaining > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }

  for (const auto& c : children) {
    std::ifstream in(c.file, std::ios::binary);
    if (!in) {
      failed = true;
      continue;
    }
    std::uint8_t skew_flag = 0;
    in.read(reinterpret_cast<char*>(&skew_flag), 1);
    if (skew_flag) skew.store(true);
    while (true) {
      std::uint64_t index = 0, count = 0;
      if (!in.read(reinterpret_cast<char*>(&index), sizeof index)) break;
      if (!in.read(reinterpret_cast<char*>(&count), sizeof count) ||
          index >= worker_logs.size()) {
        failed = true;
        break;
      }
      worker_logs[index].resize(count);
      if (!in.read(reinterpret_cast<char*>(worker_logs[index].data()),
                   static_cast<std::streamsize>(count * sizeof(ReplayEntry)))) {
        failed = true;
        break;
      }
    }
    std::error_code ec;
    fs::remove(c.file, ec);
  }
  if (failed)
    raise(Errc::target_io_error, "a replay worker process failed");
}

}  // namespace

ReplayLog replay(const ReplayPlan& plan, CancelToken* cancel) {
  std::size_t total_threads = 0;
  for (const auto& entry : plan.streams) total_threads += entry.stream.threads.size();
  if (total_threads > plan.max_workers)
    raise(Errc::invalid_spec,
          "plan needs " + std::to_string(total_threads) + " workers, cap is " +
              std::to_string(plan.max_workers));

  // Bind every event to an fd slot up front; workers then share slots
  // without touching any map.
  std::vector<InstancePlan> instances(plan.streams.size());
  for (std::size_t i = 0; i < plan.streams.size(); ++i) {
    InstancePlan& inst = instances[i];
    const IoStream& stream = plan.streams[i].stream;
    inst.stream = &stream;
    inst.start_offset_ns = plan.streams[i].start_offset_ns;
    if (inst.start_offset_ns < 0)
      raise(Errc::invalid_spec, "negative start offset");
    inst.t0 = stream.events.empty() ? 0 : stream.events.front().t_start;
    inst.event_slot.resize(stream.events.size());
    std::map<std::pair<std::int64_t, std::int64_t>, std::uint32_t> current;
    for (std::size_t e = 0; e < stream.events.size(); ++e) {
      const TraceEvent& ev = stream.events[e];
      auto key = std::make_pair(ev.pid, ev.fd);
      auto make_slot = [&](const std::string& recorded) {
        auto slot = std::make_unique<FdSlot>();
        slot->target_path = map_path(plan.target_root, recorded);
        inst.slots.push_back(std::move(slot));
        return static_cast<std::uint32_t>(inst.slots.size() - 1);
      };
      if (ev.op == OpKind::Open) {
        std::uint32_t slot = make_slot(ev.path ? *ev.path : std::string());
        current[key] = slot;
        inst.event_slot[e] = slot;
      } else {
        auto it = current.find(key);
        if (it == current.end())
          it = current.emplace(key, make_slot("orphan-" + std::to_string(ev.fd)))
                   .first;
        inst.event_slot[e] = it->second;
        if (ev.op == OpKind::Close) current.erase(it);
      }
    }
  }

  std::vector<WorkerTask> tasks;
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (const auto& [key, indices] : instances[i].stream->threads)
      tasks.push_back(WorkerTask{&instances[i], i, &indices, key.first});

  // Setup is done; the epoch starts slightly in the future so no worker is
  // late out of the gate. Forking needs a little more headroom.
  const auto epoch = steady::now() + std::chrono::milliseconds(
                                         plan.process_per_pid ? 30 : 5);
  const std::int64_t wall_epoch_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count() +
      5'000'000;

  std::vector<std::vector<ReplayEntry>> worker_logs(tasks.size());
  std::atomic<bool> stop{false};
  std::atomic<bool> skew{false};
  CancelToken local_cancel;
  CancelToken* token = cancel ? cancel : &local_cancel;

  auto worker = [&](std::size_t task_index) {
    const WorkerTask& task = tasks[task_index];
    const InstancePlan& inst = *task.instance;
    const IoStream& stream = *inst.stream;
    auto& log = worker_logs[task_index];
    log.reserve(task.thread_events->size());

    std::vector<char> buf(1 << 20);
    Rng fill(mix64(plan.seed) ^ mix64(0xD00D + task_index));
    for (auto& c : buf) c = static_cast<char>(fill.next_u64());

    steady::time_point deadline = epoch;
    steady::time_point prev_now = epoch;
    bool first = true;
    std::int64_t prev_end = 0;

    for (std::size_t idx : *task.thread_events) {
      if (stop.load(std::memory_order_relaxed) || token->cancelled() ||
          g_terminate)
        break;
      const TraceEvent& ev = stream.events[idx];
      if (first) {
        // Pacing compresses every schedule-derived wait, the stream start
        // offset included: "as fast as possible" runs with no artificial
        // delay at all.
        deadline = epoch + std::chrono::nanoseconds(pace(
                               plan.pacing,
                               inst.start_offset_ns + (ev.t_start - inst.t0)));
        first = false;
      } else {
        // Think time is the recorded end-to-start gap, waited out after the
        // previous completion.
        deadline += std::chrono::nanoseconds(pace(plan.pacing, ev.t_start - prev_end));
      }
      prev_end = ev.t_end;

      std::this_thread::sleep_until(deadline);
      const auto started = steady::now();
      if (started < prev_now) skew.store(true, std::memory_order_relaxed);

      OpResult result;
      int open_err = 0;
      FdSlot& slot = *inst.slots[inst.event_slot[idx]];
      switch (ev.op) {
        case OpKind::Open:
          if (slot.ensure_open(plan.sync_writes, &open_err) < 0)
            result.error = open_err;
          break;
        case OpKind::Close:
          slot.close_slot();
          break;
        case OpKind::Lseek: {
          const int fd = slot.ensure_open(plan.sync_writes, &open_err);
          if (fd < 0)
            result.error = open_err;
          else if (::lseek(fd, static_cast<off_t>(ev.offset.value_or(0)),
                           SEEK_SET) < 0)
            result.error = errno;
          break;
        }
        case OpKind::Read:
        case OpKind::Write: {
          const int fd = slot.ensure_open(plan.sync_writes, &open_err);
          if (fd < 0) {
            result.error = open_err;
            break;
          }
          const std::uint64_t n = ev.nbytes.value_or(0);
          result = ev.op == OpKind::Read ? run_read(fd, n, buf)
                                         : run_write(fd, n, buf);
          break;
        }
        case OpKind::Meta:
          break;  // counted, not replayed byte-for-byte
      }
      const auto completed = steady::now();
      prev_now = completed;

      ReplayEntry entry;
      entry.stream_id = ev.stream_id;
      entry.pid = ev.pid;
      entry.tid = ev.tid;
      entry.op = ev.op;
      entry.bytes = result.bytes;
      entry.scheduled_start_ns = ns_between(epoch, deadline);
      entry.actual_start_ns = ns_between(epoch, started);
      entry.latency_ns = ns_between(started, completed);
      entry.error = result.error;
      entry.short_io = result.short_io;
      log.push_back(entry);

      // The next deadline builds on this completion, not on the schedule,
      // so a slow op never eats into the following think time.
      deadline = completed;

      if (result.error != 0 && plan.strict) {
        stop.store(true, std::memory_order_relaxed);
        break;
      }
    }
  };

  if (!plan.process_per_pid) {
    std::vector<std::thread> threads;
    threads.reserve(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i)
      threads.emplace_back(worker, i);
    for (auto& t : threads) t.join();
  } else {
    run_tasks_in_processes(tasks, worker, worker_logs, skew, token);
  }

  if (skew.load()) raise(Errc::clock_skew, "monotonic clock went backwards");

  ReplayLog log;
  log.wall_epoch_ns = wall_epoch_ns;
  std::size_t total = 0;
  for (const auto& wl : worker_logs) total += wl.size();
  log.entries.reserve(total);
  for (const auto& wl : worker_logs)
    log.entries.insert(log.entries.end(), wl.begin(), wl.end());

  if (plan.strict) {
    for (const auto& e : log.entries)
      if (e.error != 0)
        raise(Errc::target_io_error,
              std::string(op_kind_name(e.op)) +
                  " failed: " + std::strerror(e.error));
  }
  return log;
}

void write_replay_log_csv(const ReplayLog& log,
                          const std::map<std::string, std::string>& config,
                          std::ostream& out) {
  out << "# itb-replay-log v1\n";
  out << "# epoch_ns=" << log.wall_epoch_ns << '\n';
  for (const auto& [k, v] : config) out << "# " << k << '=' << v << '\n';
  out << "stream_id,pid,tid,op,bytes,scheduled_start_ns,actual_start_ns,"
         "latency_ns,status\n";
  for (const auto& e : log.entries) {
    out << e.stream_id << ',' << e.pid << ',' << e.tid << ','
        << op_kind_name(e.op) << ',' << e.bytes << ',' << e.scheduled_start_ns
        << ',' << e.actual_start_ns << ',' << e.latency_ns << ',';
    if (e.error != 0)
      out << "errno:" << e.error;
    else if (e.short_io)
      out << "short";
    else
      out << "ok";
    out << '\n';
  }
}

LoadedLog read_replay_log_csv(std::istream& in) {
  LoadedLog loaded;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header_row = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto start = line.find_first_not_of("# ");
      if (start == std::string::npos) continue;
      std::string body = line.substr(start);
      auto eq = body.find('=');
      if (eq != std::string::npos) {
        std::string key = body.substr(0, eq);
        std::string value = body.substr(eq + 1);
        if (key == "epoch_ns")
          loaded.log.wall_epoch_ns = std::strtoll(value.c_str(), nullptr, 10);
        else
          loaded.config[key] = value;
      }
      continue;
    }
    if (!saw_header_row) {  // the fixed column header row
      saw_header_row = true;
      continue;
    }
    std::istringstream fields(line);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(fields, col, ',')) cols.push_back(col);
    if (cols.size() != 9)
      raise(Errc::malformed_line,
            "log line " + std::to_string(line_no) + ": expected 9 columns");
    ReplayEntry e;
    e.stream_id =
        static_cast<std::uint32_t>(std::strtoul(cols[0].c_str(), nullptr, 10));
    e.pid = std::strtoll(cols[1].c_str(), nullptr, 10);
    e.tid = std::strtoll(cols[2].c_str(), nullptr, 10);
    auto kind = op_kind_from_name(cols[3]);
    if (!kind)
      raise(Errc::malformed_line,
            "log line " + std::to_string(line_no) + ": bad op " + cols[3]);
    e.op = *kind;
    e.bytes = std::strtoull(cols[4].c_str(), nullptr, 10);
    e.scheduled_start_ns = std::strtoll(cols[5].c_str(), nullptr, 10);
    e.actual_start_ns = std::strtoll(cols[6].c_str(), nullptr, 10);
    e.latency_ns = std::strtoll(cols[7].c_str(), nullptr, 10);
    if (cols[8] == "short")
      e.short_io = true;
    else if (cols[8].rfind("errno:", 0) == 0)
      e.error = std::atoi(cols[8].c_str() + 6);
    loaded.log.entries.push_back(e);
  }
  return loaded;
}

LoadedLog read_replay_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open log file " + path);
  return read_replay_log_csv(in);
}

}  // namespace itb
