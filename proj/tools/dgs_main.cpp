#include <iostream>
#include <string>
#include <vector>

#include "dgs/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return dgs::cli::run(args, std::cout, std::cerr);
}
