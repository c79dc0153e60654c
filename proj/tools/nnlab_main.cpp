#include <iostream>

#include "nnlab/cli.hpp"

int main(int argc, char** argv) { return nnlab::run_cli(argc, argv, std::cout, std::cerr); }
