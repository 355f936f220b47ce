#include <string>
#include <vector>

#include "pseudoherm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pseudoherm::cli_main(args);
}
