#include <iostream>
#include <string>
#include <vector>

#include "synthmix/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return synthmix::cli::main_entry(args, std::cout, std::cerr);
}
