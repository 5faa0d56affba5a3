#include <iostream>

#include "wqst/cli.hpp"

int main(int argc, char** argv) { return wqst::cli::run(argc, argv, std::cout, std::cerr); }
