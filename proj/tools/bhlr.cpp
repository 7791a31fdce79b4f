#include <exception>
#include <iostream>

#include "bhlr/cli.hpp"

int main(int argc, char** argv) {
  try {
    return bhlr::cli::run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
