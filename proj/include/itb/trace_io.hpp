// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#pragma once

#include <iosfwd>
#include <string>

#include "itb/trace.hpp"

namespace itb {

// Canonical trace format, one event per line:
//
//   itb-trace v1
//   # comment
//   stream_id,pid,tid,op,arg,offset,nbytes,t_start_ns,t_end_ns
//
// op is one of open, close, read, write, lseek, meta. arg is a quoted path
// for open (embedded quotes doubled, CSV style) and an fd integer otherwise.
// open also records the fd label it binds, in the offset column it leaves
// unused. offset is set only for lseek (absolute seek target), nbytes only
// for read/write; non-applicable columns stay empty. Timestamps are integer
// nanoseconds. Lines starting with '#' and blank lines are ignored after the
// header.
inline constexpr const char* trace_format_header = "itb-trace v1";

// Parses one canonical trace. All events must share one stream id.
// Raises malformed_line on syntax errors, schema_violation on field-presence
// or value violations, and orphan_fd / non_monotone_thread in strict mode.
IoStream parse_trace(std::istream& in, RepairMode mode = RepairMode::repair);
IoStream parse_trace_file(const std::string& path,
                          RepairMode mode = RepairMode::repair);

void serialize_trace(const IoStream& stream, std::ostream& out);
std::string serialize_trace(const IoStream& stream);
void write_trace_file(const IoStream& stream, const std::string& path);

}  // namespace itb
