#include "eogv/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return eogv::run_cli(argc, argv, std::cout, std::cerr); }
