#include <iostream>

#include "npassive/cli.hpp"

int main(int argc, char** argv) { return npassive::run_cli(argc, argv, std::cout, std::cerr); }
