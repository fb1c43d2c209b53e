#include <iostream>

#include "amrgen/cli.h"

int main(int argc, char** argv) { return amrgen::run_cli(argc, argv, std::cout, std::cerr); }
