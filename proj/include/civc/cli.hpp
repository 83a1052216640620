// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>

namespace civc::cli {

// Full command-line driver behind the `civc` binary, factored out so tests
// can run commands in-process. Subcommands: encode, decode, analyze.
//
// Exit codes: 0 success, 1 internal error, 2 usage or configuration error,
// 3 file I/O error, 4 malformed bitstream.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace civc::cli
