#include <iostream>

#include "namdkit/cli.hpp"

int main(int argc, char** argv) {
  return namdkit::cli::run({argv, argv + argc}, std::cout, std::cerr);
}
