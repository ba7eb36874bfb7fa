#include <iostream>
#include <string>
#include <vector>

#include "bmips/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return bmips::cli::run(args, std::cout, std::cerr);
}
