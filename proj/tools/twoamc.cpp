#include <iostream>

#include "twoamc/cli.hpp"

int main(int argc, char** argv) { return twoamc::cli::run_cli(argc, argv, std::cout, std::cerr); }
