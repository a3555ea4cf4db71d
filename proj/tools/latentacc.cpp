#include <iostream>

#include "latentacc/cli.hpp"

int main(int argc, char** argv) { return latentacc::run(argc, argv, std::cout, std::cerr); }
