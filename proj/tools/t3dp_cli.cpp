#include <iostream>

#include "t3dp/cli.hpp"

int main(int argc, char** argv) { return t3dp::cli::run(argc, argv, std::cout, std::cerr); }
