// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#pragma once

#include <string>
#include <vector>

namespace itb {

// Front door used by the itb binary and by in-process tests.
// Exit codes: 0 success, 1 domain error (reported with its error name),
// 2 usage error.
int cli_run(int argc, const char* const* argv);
int cli_run(const std::vector<std::string>& args);  // without program name

}  // namespace itb
