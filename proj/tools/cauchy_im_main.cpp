#include "cauchy_im/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return cauchy_im::run_cli(argc, argv, std::cout, std::cerr); }
