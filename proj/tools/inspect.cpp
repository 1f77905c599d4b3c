#include <iostream>

#include "roboinspect/cli.hpp"

int main(int argc, char** argv) { return roboinspect::run_cli(argc, argv, std::cout, std::cerr); }
