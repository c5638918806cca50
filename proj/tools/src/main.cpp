#include <string>
#include <vector>

#include "stresscast/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return stresscast::cli::run_cli(args);
}
