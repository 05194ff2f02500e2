#include <iostream>
#include <string>
#include <vector>

#include "agile/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return agile::cli::run_cli(args, std::cout, std::cerr);
}
