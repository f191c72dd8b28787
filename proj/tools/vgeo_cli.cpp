#include <iostream>

#include "vgeo/cli.hpp"

int main(int argc, char** argv) { return vgeo::run_cli(argc, argv, std::cout, std::cerr); }
