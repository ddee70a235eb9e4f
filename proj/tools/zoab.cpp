#include <iostream>

#include "zoab/cli.hpp"

int main(int argc, char** argv) { return zoab::run_cli(argc, argv, std::cout, std::cerr); }
