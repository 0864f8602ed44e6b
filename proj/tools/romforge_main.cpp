// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "romforge/cli/commands.hpp"

int main(int argc, char **argv)
{
  return romforge::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
