// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace itb {

// Every recoverable failure in the toolkit is reported as an Error with a
// stable code, so callers (and the CLI) can react to the kind instead of
// parsing message text.
enum class Errc {
  malformed_line,      // trace syntax failure
  schema_violation,    // wrong field presence / value constraint for an op
  non_monotone_thread, // overlapping events in one thread (strict mode)
  orphan_fd,           // fd used without a live open (strict mode)
  empty_trace,
  invalid_spec,
  insufficient_space,
  permission_denied,
  target_io_error,
  clock_skew,
  position_underflow,
  domain_error,
  empty_log,
  mismatched_configs,
  io_error, // generic file-system failure outside the codes above
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }
  const char* name() const { return errc_name(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace itb
