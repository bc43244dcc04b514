#include <iostream>
#include <string>
#include <vector>

#include "levydpp/runner.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return levydpp::run(args, std::cout, std::cerr);
}
