// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "cascade/cli.hpp"

int main(int argc, char** argv) { return cascade::cli::run(argc, argv, std::cout, std::cerr); }
