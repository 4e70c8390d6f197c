#include <iostream>

#include "ribound/cli.hpp"

int main(int argc, char** argv) { return ribound::cli::run(argc, argv, std::cout, std::cerr); }
