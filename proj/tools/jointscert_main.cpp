#include <iostream>
#include <string>
#include <vector>

#include "jointscert/commands.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  const std::vector<std::string> args(argv, argv + argc);
  return jointscert::run_command(args, std::cout, std::cerr);
}
