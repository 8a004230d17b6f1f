#include <iostream>
#include <string>
#include <vector>

#include "egocf/trainkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return egocf::trainkit::run_cli(args, std::cout, std::cerr);
}
