#include <iostream>
#include <string>
#include <vector>

#include "exptower/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return exptower::cli::run(args, std::cout, std::cerr);
}
