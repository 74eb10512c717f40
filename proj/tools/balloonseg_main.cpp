#include "balloonseg/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return balloonseg::run_cli(argc, argv, std::cout, std::cerr); }
