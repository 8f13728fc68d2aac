#include <iostream>

#include "amix/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return amix::run_cli(args, std::cout, std::cerr);
}
