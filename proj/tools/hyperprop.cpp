#include "hyperprop/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hyperprop::run(argc, argv, std::cout, std::cerr); }
