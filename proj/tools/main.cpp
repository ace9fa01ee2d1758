#include <iostream>

#include "eca/cli.hpp"

int main(int argc, char** argv) { return eca::cli_dispatch(argc, argv, std::cout, std::cerr); }
