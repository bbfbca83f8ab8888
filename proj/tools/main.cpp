#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return diffatd::run_cli(argc, argv, std::cerr); }
