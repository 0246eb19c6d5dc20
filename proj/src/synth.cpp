// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#include "itb/synth.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "itb/rng.hpp"
#include "itb/trace_io.hpp"

namespace itb {

namespace {

// Fixed per-kind service times used for synthetic timestamps. They only
// shape the trace timeline; replay measures real latencies.
constexpr std::int64_t resp_ns(OpKind k) {
  switch (k) {
    case OpKind::Open: return 10'000;
    case OpKind::Close: return 5'000;
    case OpKind::Read: return 80'000;
    case OpKind::Write: return 150'000;
    case OpKind::Lseek: return 2'000;
    case OpKind::Meta: return 5'000;
  }
  return 0;
}

constexpr std::uint64_t max_payload_bytes = 16ull << 20;
constexpr std::uint64_t position_align = 4096;

std::string file_path(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "data/f%04llu.dat",
                static_cast<unsigned long long>(index));
  return buf;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    raise(Errc::invalid_spec, "bad number '" + s + "' in " + what);
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    raise(Errc::invalid_spec, "bad integer '" + s + "' in " + what);
  return v;
}

SizeModel parse_size_model(const std::string& text) {
  auto colon = text.find(':');
  std::string kind = text.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "constant") return SizeModel::constant(parse_double(args, text));
  auto comma = args.find(',');
  if (comma == std::string::npos)
    raise(Errc::invalid_spec, "size model '" + text + "' needs two parameters");
  double a = parse_double(args.substr(0, comma), text);
  double b = parse_double(args.substr(comma + 1), text);
  if (kind == "uniform") return SizeModel::uniform(a, b);
  if (kind == "lognormal") return SizeModel::lognormal(a, b);
  raise(Errc::invalid_spec, "unknown size model '" + kind + "'");
}

ThinkModel parse_think_model(const std::string& text) {
  auto colon = text.find(':');
  std::string kind = text.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "constant") return ThinkModel::constant(parse_double(args, text));
  if (kind == "exponential")
    return ThinkModel::exponential(parse_double(args, text));
  if (kind == "empirical") {
    auto stream = parse_trace_file(args);
    auto model = ThinkModel::empirical(derive_think_times(stream).all_gaps());
    if (model.gaps.empty())
      raise(Errc::invalid_spec, "empirical think source '" + args + "' has no gaps");
    return model;
  }
  raise(Errc::invalid_spec, "unknown think model '" + kind + "'");
}

std::string format_size_model(const SizeModel& m) {
  std::ostringstream out;
  out.precision(17);
  switch (m.kind) {
    case SizeModel::Kind::constant: out << "constant:" << m.a; break;
    case SizeModel::Kind::uniform: out << "uniform:" << m.a << ',' << m.b; break;
    case SizeModel::Kind::lognormal:
      out << "lognormal:" << m.a << ',' << m.b;
      break;
  }
  return out.str();
}

std::string format_think_model(const ThinkModel& m) {
  std::ostringstream out;
  out.precision(17);
  switch (m.kind) {
    case ThinkModel::Kind::constant: out << "constant:" << m.a; break;
    case ThinkModel::Kind::exponential: out << "exponential:" << m.a; break;
    case ThinkModel::Kind::empirical:
      out << "empirical(" << m.gaps.size() << " gaps)";
      break;
  }
  return out.str();
}

}  // namespace

void GenSpec::validate() const {
  double sum = 0;
  for (double f : op_mix) {
    if (f < 0) raise(Errc::invalid_spec, "negative op_mix fraction");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    raise(Errc::invalid_spec, "op_mix must sum to 1");
  if (op_mix[op_index(OpKind::Open)] != 0 || op_mix[op_index(OpKind::Close)] != 0)
    raise(Errc::invalid_spec,
          "open/close are synthesized as framing, their mix must be 0");
  if (n_files < 1 || n_threads < 1 || n_events < 1)
    raise(Errc::invalid_spec, "n_files, n_threads and n_events must be >= 1");
  if (file_size_bytes < position_align)
    raise(Errc::invalid_spec, "file_size_bytes must be >= 4096");
  for (const SizeModel* m : {&read_size, &write_size}) {
    switch (m->kind) {
      case SizeModel::Kind::constant:
        if (m->a < 1) raise(Errc::invalid_spec, "constant size must be >= 1");
        break;
      case SizeModel::Kind::uniform:
        if (m->a < 1 || m->b < m->a)
          raise(Errc::invalid_spec, "uniform size needs 1 <= low <= high");
        break;
      case SizeModel::Kind::lognormal:
        if (m->b < 0) raise(Errc::invalid_spec, "lognormal sigma must be >= 0");
        break;
    }
  }
  switch (think.kind) {
    case ThinkModel::Kind::constant:
    case ThinkModel::Kind::exponential:
      if (think.a < 0) raise(Errc::invalid_spec, "think time must be >= 0");
      break;
    case ThinkModel::Kind::empirical:
      if (think.gaps.empty())
        raise(Errc::invalid_spec, "empirical think model has no gaps");
      break;
  }
}

GenSpec maxdb_init_spec() {
  // Mix from the op counts of a recorded database initialization run:
  // 14389 reads, 302201 writes, 312752 seeks, 2627 metadata ops.
  constexpr double total = 631969.0;
  GenSpec spec;
  spec.op_mix[op_index(OpKind::Read)] = 14389.0 / total;
  spec.op_mix[op_index(OpKind::Write)] = 302201.0 / total;
  spec.op_mix[op_index(OpKind::Lseek)] = 312752.0 / total;
  spec.op_mix[op_index(OpKind::Meta)] = 2627.0 / total;
  // Lognormal sizes fitted to mean 6884 B (read) and 7995 B (write) with
  // sigma 0.5: mu = ln(mean) - sigma^2/2.
  spec.read_size = SizeModel::lognormal(8.71195515733143, 0.5);
  spec.write_size = SizeModel::lognormal(8.861571625268054, 0.5);
  spec.think = ThinkModel::exponential(8'700'000);  // ~110 ops/s per thread
  spec.n_files = 8;
  spec.file_size_bytes = 64ull << 20;
  spec.n_threads = 1;
  spec.n_events = 100'000;
  spec.seed = 1;
  return spec;
}

void apply_spec_setting(GenSpec& spec, const std::string& key,
                        const std::string& value) {
  if (key == "mix_open") spec.op_mix[op_index(OpKind::Open)] = parse_double(value, key);
  else if (key == "mix_close") spec.op_mix[op_index(OpKind::Close)] = parse_double(value, key);
  else if (key == "mix_read") spec.op_mix[op_index(OpKind::Read)] = parse_double(value, key);
  else if (key == "mix_write") spec.op_mix[op_index(OpKind::Write)] = parse_double(value, key);
  else if (key == "mix_lseek") spec.op_mix[op_index(OpKind::Lseek)] = parse_double(value, key);
  else if (key == "mix_meta") spec.op_mix[op_index(OpKind::Meta)] = parse_double(value, key);
  else if (key == "read_size_model") spec.read_size = parse_size_model(value);
  else if (key == "write_size_model") spec.write_size = parse_size_model(value);
  else if (key == "think_model") spec.think = parse_think_model(value);
  else if (key == "n_files") spec.n_files = parse_u64(value, key);
  else if (key == "file_size_bytes") spec.file_size_bytes = parse_u64(value, key);
  else if (key == "n_threads") spec.n_threads = parse_u64(value, key);
  else if (key == "n_events") spec.n_events = parse_u64(value, key);
  else if (key == "seed") spec.seed = parse_u64(value, key);
  else raise(Errc::invalid_spec, "unknown spec key '" + key + "'");
}

GenSpec parse_gen_spec(std::istream& in) {
  GenSpec spec;
  spec.op_mix = {};  // a spec file must state its own mix
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      raise(Errc::invalid_spec,
            "line " + std::to_string(line_no) + ": expected key=value");
    apply_spec_setting(spec, line.substr(0, eq), line.substr(eq + 1));
  }
  return spec;
}

GenSpec load_gen_spec(const std::string& name_or_path) {
  if (name_or_path == "maxdb-init") return maxdb_init_spec();
  std::ifstream in(name_or_path);
  if (!in) raise(Errc::invalid_spec, "cannot open spec file " + name_or_path);
  return parse_gen_spec(in);
}

std::string format_gen_spec(const GenSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  out << "mix_read=" << spec.op_mix[op_index(OpKind::Read)] << '\n'
      << "mix_write=" << spec.op_mix[op_index(OpKind::Write)] << '\n'
      << "mix_lseek=" << spec.op_mix[op_index(OpKind::Lseek)] << '\n'
      << "mix_meta=" << spec.op_mix[op_index(OpKind::Meta)] << '\n'
      << "read_size_model=" << format_size_model(spec.read_size) << '\n'
      << "write_size_model=" << format_size_model(spec.write_size) << '\n'
      << "think_model=" << format_think_model(spec.think) << '\n'
      << "n_files=" << spec.n_files << '\n'
      << "file_size_bytes=" << spec.file_size_bytes << '\n'
      << "n_threads=" << spec.n_threads << '\n'
      << "n_events=" << spec.n_events << '\n'
      << "seed=" << spec.seed << '\n';
  return out.str();
}

namespace {

std::int64_t draw_think(Rng& rng, const ThinkModel& m) {
  switch (m.kind) {
    case ThinkModel::Kind::constant:
      return static_cast<std::int64_t>(m.a);
    case ThinkModel::Kind::exponential:
      return std::llround(rng.exponential(m.a));
    case ThinkModel::Kind::empirical:
      return m.gaps[rng.below(m.gaps.size())];
  }
  return 0;
}

std::uint64_t draw_size(Rng& rng, const SizeModel& m, std::uint64_t cap) {
  double v = 0;
  switch (m.kind) {
    case SizeModel::Kind::constant: v = m.a; break;
    case SizeModel::Kind::uniform: v = rng.uniform(m.a, m.b); break;
    case SizeModel::Kind::lognormal: v = rng.lognormal(m.a, m.b); break;
  }
  if (v < 1) v = 1;
  auto bytes = static_cast<std::uint64_t>(std::llround(v));
  if (bytes < 1) bytes = 1;
  return std::min(bytes, cap);
}

}  // namespace

IoStream generate(const GenSpec& spec) {
  spec.validate();

  // Cumulative mix in fixed kind order keeps draws stable.
  std::array<double, op_kind_count> cum{};
  double running = 0;
  for (std::size_t i = 0; i < op_kind_count; ++i) {
    running += spec.op_mix[i];
    cum[i] = running;
  }
  const double mix_total = running;
  const std::uint64_t payload_cap =
      std::min<std::uint64_t>(max_payload_bytes, spec.file_size_bytes);
  const std::uint64_t position_slots = spec.file_size_bytes / position_align;

  std::vector<TraceEvent> events;
  events.reserve(spec.n_events + 2 * spec.n_files * spec.n_threads);

  const std::int64_t pid = 1000;
  const std::uint64_t per_thread = spec.n_events / spec.n_threads;
  const std::uint64_t remainder = spec.n_events % spec.n_threads;

  for (std::uint64_t t = 0; t < spec.n_threads; ++t) {
    Rng rng(mix64(spec.seed) ^ mix64(0xA5F0F00D + t));
    const std::int64_t tid = 1 + static_cast<std::int64_t>(t);
    const std::int64_t fd_base = 3 + static_cast<std::int64_t>(t * spec.n_files);
    const std::uint64_t budget = per_thread + (t < remainder ? 1 : 0);

    std::vector<std::uint64_t> positions(spec.n_files, 0);
    std::int64_t now = 0;

    auto emit = [&](OpKind op, std::int64_t fd, auto&& fill) {
      TraceEvent e;
      e.pid = pid;
      e.tid = tid;
      e.op = op;
      e.fd = fd;
      e.t_start = now;
      e.t_end = now + resp_ns(op);
      fill(e);
      now = e.t_end;
      events.push_back(std::move(e));
    };

    for (std::uint64_t f = 0; f < spec.n_files; ++f)
      emit(OpKind::Open, fd_base + static_cast<std::int64_t>(f),
           [&](TraceEvent& e) { e.path = file_path(f); });

    for (std::uint64_t i = 0; i < budget; ++i) {
      now += draw_think(rng, spec.think);
      const double u = rng.uniform01() * mix_total;
      OpKind kind = OpKind::Meta;
      for (std::size_t k = 0; k < op_kind_count; ++k) {
        if (u < cum[k]) {
          kind = static_cast<OpKind>(k);
          break;
        }
      }
      const std::uint64_t f = rng.below(spec.n_files);
      const std::int64_t fd = fd_base + static_cast<std::int64_t>(f);
      switch (kind) {
        case OpKind::Lseek: {
          const std::uint64_t target = rng.below(position_slots) * position_align;
          positions[f] = target;
          emit(OpKind::Lseek, fd, [&](TraceEvent& e) { e.offset = target; });
          break;
        }
        case OpKind::Read:
        case OpKind::Write: {
          const SizeModel& model =
              kind == OpKind::Read ? spec.read_size : spec.write_size;
          const std::uint64_t size = draw_size(rng, model, payload_cap);
          if (positions[f] + size > spec.file_size_bytes) positions[f] = 0;
          emit(kind, fd, [&](TraceEvent& e) { e.nbytes = size; });
          positions[f] += size;
          break;
        }
        default:
          emit(OpKind::Meta, fd, [](TraceEvent&) {});
          break;
      }
    }

    for (std::uint64_t f = 0; f < spec.n_files; ++f)
      emit(OpKind::Close, fd_base + static_cast<std::int64_t>(f),
           [](TraceEvent&) {});
  }

  return IoStream::build(0, std::move(events), RepairMode::strict);
}

}  // namespace itb
