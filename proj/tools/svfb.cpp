#include "svfb/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return svfb::run_cli(argc, argv, std::cout, std::cerr); }
