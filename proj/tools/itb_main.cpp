// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#include "itb/cli.hpp"

int main(int argc, char** argv) { return itb::cli_run(argc, argv); }
