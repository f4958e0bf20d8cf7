#include <iostream>

#include "mora_cli/cli.hpp"

int main(int argc, char** argv) { return mora::cli::run_main(argc, argv, std::cout, std::cerr); }
