#include <iostream>
#include <string>
#include <vector>

#include "clustergas_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return clustergas::cli::run(args, std::cout, std::cerr);
}
