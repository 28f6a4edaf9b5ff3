#include <iostream>

#include "bubbelator/cli.hpp"

int main(int argc, char** argv) {
  return bubbelator::run_cli(argc, argv, std::cout, std::cerr);
}
