// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "flowdmd/cli.hpp"

int main(int argc, char** argv) { return flowdmd::cli::run(argc, argv, std::cout, std::cerr); }
