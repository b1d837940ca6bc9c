#include <iostream>

#include "aksvd/cli.hpp"

int main(int argc, char** argv) { return aksvd::run_cli(argc, argv, std::cout, std::cerr); }
