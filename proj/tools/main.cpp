#include <iostream>
#include <string>
#include <vector>

#include "rdh/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rdh::cli::run(args, std::cout, std::cerr);
}
