#include <vector>
#include <string>

#include "spoofvqa/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return spoofvqa::run_cli(args);
}
