// Copyright (c) 2026 the civc authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "civc/cli.hpp"

int main(int argc, char** argv) {
  return civc::cli::run_cli(argc, argv, std::cout, std::cerr);
}
