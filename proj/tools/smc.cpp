#include <iostream>

#include "smc/cli.hpp"

int main(int argc, char** argv) { return smc::cli::run(argc, argv, std::cout, std::cerr); }
