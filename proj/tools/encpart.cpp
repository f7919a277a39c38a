#include <iostream>

#include "encpart/cli/cli.hpp"

int main(int argc, char** argv) { return encpart::cli::run_cli(argc, argv, std::cout, std::cerr); }
