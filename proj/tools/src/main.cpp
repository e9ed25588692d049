#include <iostream>

#include "scla_cli/cli.hpp"

int main(int argc, char** argv) {
  return scla::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
