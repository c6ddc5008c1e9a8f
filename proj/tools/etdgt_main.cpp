#include "etdgt/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return etdgt::run_cli(argc, argv, std::cout, std::cerr);
}
