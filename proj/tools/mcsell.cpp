#include <iostream>

#include "mcsell/cli.hpp"

int main(int argc, char** argv) { return mcsell::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
