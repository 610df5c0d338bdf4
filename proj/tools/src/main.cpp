#include <iostream>

#include "scss/cli.hpp"

int main(int argc, char** argv) {
  return scss::cli_main(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
