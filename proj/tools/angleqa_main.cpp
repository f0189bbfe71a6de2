#include <iostream>

#include "angleqa/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return angleqa::run_cli(args, std::cin, std::cout, std::cerr);
}
