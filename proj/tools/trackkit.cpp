#include <iostream>

#include "trackkit/cli.hpp"

int main(int argc, char** argv) { return trackkit::run_cli(argc, argv, std::cout, std::cerr); }
