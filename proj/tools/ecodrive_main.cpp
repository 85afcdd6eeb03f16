#include <iostream>

#include "ecodrive/cli/commands.hpp"

int main(int argc, char** argv) { return ecodrive::cli::run_cli(argc, argv, std::cout, std::cerr); }
