#include <iostream>

#include "dp2s/cli.hpp"

int main(int argc, char** argv) { return dp2s::cli::run(argc, argv, std::cout, std::cerr); }
