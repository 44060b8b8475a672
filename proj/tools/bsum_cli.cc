// Entry point of the bsum command-line tool.

#include <iostream>

#include "bsum/cli.h"

int main(int argc, char** argv) {
  return bsum::run_cli(argc, argv, std::cout, std::cerr);
}
