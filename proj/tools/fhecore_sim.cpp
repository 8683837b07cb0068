// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "fhecore/cli.hpp"

int main(int argc, char** argv) {
  return fhecore::cli::main_entry(argc, argv, std::cout, std::cerr);
}
