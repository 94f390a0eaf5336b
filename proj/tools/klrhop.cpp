#include <iostream>

#include "klrhop/cli.hpp"

int main(int argc, char** argv) { return klrhop::cli_main(argc, argv, std::cout, std::cerr); }
