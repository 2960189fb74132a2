#include <iostream>
#include <string>
#include <vector>

#include "sepnmf/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return sepnmf::cli::run(args, std::cout, std::cerr);
}
