#include <iostream>

#include "spn_cli/cli.hpp"

int main(int argc, char** argv) { return spn::cli::run(argc, argv, std::cout, std::cerr); }
