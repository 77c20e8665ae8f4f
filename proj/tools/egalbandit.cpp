#include <string>
#include <vector>

#include "egalbandit/cli.hpp"

int main(int argc, char** argv) {
  return egalbandit::cli::main(std::vector<std::string>(argv + 1, argv + argc));
}
