#include <iostream>
#include <string>
#include <vector>

#include "mkot/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mkot::cli::run(args, std::cout, std::cerr);
}
