#include <iostream>

#include "beamtomo/cli.hpp"

int main(int argc, char** argv) {
  return beamtomo::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
