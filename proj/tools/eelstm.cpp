#include <string>
#include <vector>

#include "eelstm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return eelstm::cli::run(args);
}
