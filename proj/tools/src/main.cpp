#include <iostream>

#include "xplab/cli.hpp"

int main(int argc, char** argv) {
  return xplab::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
