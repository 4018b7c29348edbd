#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return meanfield::cli::run(argc, argv, std::cout, std::cerr); }
