#include <iostream>

#include "gazemap/cli.hpp"

int main(int argc, char** argv) { return gazemap::cli::run(argc, argv, std::cout, std::cerr); }
