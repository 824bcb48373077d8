#include <iostream>

#include "qmatch/cli.hpp"

int main(int argc, char** argv) {
  return qmatch::cli::run(argc, argv, std::cout, std::cerr);
}
