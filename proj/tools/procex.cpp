#include <iostream>

#include "procex/cli.hpp"

int main(int argc, char** argv) { return procex::cli::run(argc, argv, std::cout, std::cerr); }
