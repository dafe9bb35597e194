#include <iostream>

#include <gfid_cli/cli.hpp>

int main(int argc, char** argv) { return gfid::cli::run_cli(argc, argv, std::cout, std::cerr); }
