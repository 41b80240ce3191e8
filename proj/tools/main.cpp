#include <iostream>

#include "patpoisson/cli.hpp"

int main(int argc, char** argv) {
  return patpoisson::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
