#include <iostream>
#include <string>
#include <vector>

#include "evscore/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return evscore::cli::run(args, std::cout, std::cerr);
}
