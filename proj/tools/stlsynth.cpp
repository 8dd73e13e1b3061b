#include "stlsynth/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return stlsynth::run_cli(argc, argv, std::cout, std::cerr); }
