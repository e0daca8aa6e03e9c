#include <string>
#include <vector>

#include "dcpp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dcpp::cli::run(args);
}
