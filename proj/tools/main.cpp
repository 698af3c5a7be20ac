#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  return semalloc::cli::run_cli(argc, argv, std::cout, std::cerr);
}
