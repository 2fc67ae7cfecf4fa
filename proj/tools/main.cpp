#include <iostream>

#include "quadsig_cli.hpp"

int main(int argc, char** argv) { return quadsig::cli::run(argc, argv, std::cout, std::cerr); }
