#include <iostream>

#include "ordshift/cli.hpp"

int main(int argc, char** argv) { return ordshift::run_cli(argc, argv, std::cout, std::cerr); }
