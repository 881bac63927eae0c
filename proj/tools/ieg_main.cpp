#include "ieg/cli.hpp"

int main(int argc, char** argv) {
  return ieg::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
