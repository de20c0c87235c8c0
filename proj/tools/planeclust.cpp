#include <iostream>
#include <string>
#include <vector>

#include "planeclust/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return planeclust::run_cli(args, std::cout, std::cerr);
}
