#include <string>
#include <vector>

#include "asrpost/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return asrpost::run_cli(args);
}
