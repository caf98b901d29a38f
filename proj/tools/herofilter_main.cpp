#include <string>
#include <vector>

#include "herofilter/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return herofilter::run_cli(args);
}
