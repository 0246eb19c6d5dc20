// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#include "itb/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace itb {

namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  raise(Errc::malformed_line, "line " + std::to_string(line_no) + ": " + what);
}

[[noreturn]] void violation(std::size_t line_no, const std::string& field) {
  raise(Errc::schema_violation,
        "line " + std::to_string(line_no) + " field " + field);
}

// Splits one record into its nine columns. Only the arg column (index 4) may
// be quoted; a quoted field uses doubled quotes for literal ones.
struct Field {
  std::string text;
  bool quoted = false;
};

std::vector<Field> split_fields(const std::string& line, std::size_t line_no) {
  std::vector<Field> fields;
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (true) {
    Field f;
    if (i < n && line[i] == '"') {
      f.quoted = true;
      ++i;
      while (true) {
        if (i >= n) malformed(line_no, "unterminated quoted field");
        char c = line[i];
        if (c == '"') {
          if (i + 1 < n && line[i + 1] == '"') {
            f.text.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        f.text.push_back(c);
        ++i;
      }
      if (i < n && line[i] != ',')
        malformed(line_no, "text after closing quote");
    } else {
      while (i < n && line[i] != ',') {
        f.text.push_back(line[i]);
        ++i;
      }
    }
    fields.push_back(std::move(f));
    if (i >= n) break;
    ++i;  // skip ','
    if (i == n) {  // trailing comma: one empty final field
      fields.push_back(Field{});
      break;
    }
  }
  return fields;
}

template <typename Int>
Int parse_int(const Field& f, const char* name, std::size_t line_no) {
  if (f.quoted || f.text.empty()) malformed(line_no, std::string("bad ") + name);
  Int value{};
  const char* first = f.text.data();
  const char* last = first + f.text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    malformed(line_no, std::string("bad ") + name + " '" + f.text + "'");
  return value;
}

std::string quote(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

IoStream parse_trace(std::istream& in, RepairMode mode) {
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) malformed(1, "missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != trace_format_header)
    malformed(1, "expected header '" + std::string(trace_format_header) + "'");

  std::vector<TraceEvent> events;
  std::vector<std::size_t> lines;
  std::optional<std::uint32_t> stream_id;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::vector<Field> f = split_fields(line, line_no);
    if (f.size() != 9)
      malformed(line_no, "expected 9 fields, got " + std::to_string(f.size()));

    TraceEvent e;
    e.stream_id = parse_int<std::uint32_t>(f[0], "stream_id", line_no);
    e.pid = parse_int<std::int64_t>(f[1], "pid", line_no);
    e.tid = parse_int<std::int64_t>(f[2], "tid", line_no);
    auto kind = op_kind_from_name(f[3].text);
    if (f[3].quoted || !kind) malformed(line_no, "unknown op '" + f[3].text + "'");
    e.op = *kind;

    if (e.op == OpKind::Open) {
      // open: arg carries the quoted path; the fd label the open binds rides
      // in the offset column, which open leaves unused otherwise.
      if (!f[4].quoted) violation(line_no, "path");
      e.path = f[4].text;
      if (f[5].text.empty()) violation(line_no, "fd");
      e.fd = parse_int<std::int64_t>(f[5], "fd", line_no);
    } else {
      e.fd = parse_int<std::int64_t>(f[4], "fd", line_no);
      if (!f[5].text.empty() || f[5].quoted)
        e.offset = parse_int<std::uint64_t>(f[5], "offset", line_no);
    }
    if (!f[6].text.empty() || f[6].quoted)
      e.nbytes = parse_int<std::uint64_t>(f[6], "nbytes", line_no);
    e.t_start = parse_int<std::int64_t>(f[7], "t_start", line_no);
    e.t_end = parse_int<std::int64_t>(f[8], "t_end", line_no);

    if (const char* field = event_schema_violation(e)) violation(line_no, field);

    if (!stream_id) stream_id = e.stream_id;
    else if (*stream_id != e.stream_id) violation(line_no, "stream_id");

    events.push_back(std::move(e));
    lines.push_back(line_no);
  }

  return IoStream::build(stream_id.value_or(0), std::move(events), mode,
                         {lines.data(), lines.size()});
}

IoStream parse_trace_file(const std::string& path, RepairMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, "cannot open trace file " + path);
  return parse_trace(in, mode);
}

void serialize_trace(const IoStream& stream, std::ostream& out) {
  out << trace_format_header << '\n';
  for (const TraceEvent& e : stream.events) {
    out << e.stream_id << ',' << e.pid << ',' << e.tid << ','
        << op_kind_name(e.op) << ',';
    if (e.op == OpKind::Open)
      out << quote(e.path ? *e.path : std::string()) << ',' << e.fd;
    else {
      out << e.fd << ',';
      if (e.offset) out << *e.offset;
    }
    out << ',';
    if (e.nbytes) out << *e.nbytes;
    out << ',' << e.t_start << ',' << e.t_end << '\n';
  }
}

std::string serialize_trace(const IoStream& stream) {
  std::ostringstream out;
  serialize_trace(stream, out);
  return out.str();
}

void write_trace_file(const IoStream& stream, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_error, "cannot write trace file " + path);
  serialize_trace(stream, out);
  out.flush();
  if (!out) raise(Errc::io_error, "short write to " + path);
}

}  // namespace itb
