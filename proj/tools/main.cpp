#include <iostream>

#include "ecosim/cli.hpp"

int main(int argc, char** argv) { return ecosim::cli_main(argc, argv, std::cout, std::cerr); }
