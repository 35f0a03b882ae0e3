#include <iostream>

#include "polyball/cli.hpp"

int main(int argc, char** argv) { return polyball::run(argc, argv, std::cout, std::cerr); }
