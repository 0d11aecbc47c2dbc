#include <iostream>

#include "d2d/cli.hpp"

int main(int argc, char** argv) { return d2d::cli_run(argc, argv, std::cout, std::cerr); }
