#include "batfleet/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return batfleet::cli::run(argc, argv, std::cout, std::cerr); }
