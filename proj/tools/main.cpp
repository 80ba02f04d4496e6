#include <iostream>

#include "aukit/cli.hpp"

int main(int argc, char** argv) {
  return aukit::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
