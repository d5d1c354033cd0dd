#include <iostream>
#include <string>
#include <vector>

#include "mocp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mocp::run_cli(args, std::cout, std::cerr);
}
