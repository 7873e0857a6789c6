#include <iostream>

#include "bezred/cli.hpp"

int main(int argc, char** argv) { return bezred::cli::run(argc, argv, std::cout, std::cerr); }
