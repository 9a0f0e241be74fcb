/**
 * @file accord.cpp
 * @brief Command-line entry point.
 */
#include <iostream>

#include "accord/cli.hpp"

int main(int argc, char** argv) { return accord::cli::run(argc, argv, std::cout, std::cerr); }
