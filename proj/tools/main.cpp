#include <iostream>

#include "lsim/cli.hpp"

int main(int argc, char** argv) { return lsim::cli_main(argc, argv, std::cout, std::cerr); }
