#include <iostream>

#include "tropprod/cli.hpp"

int main(int argc, char** argv) { return tropprod::main_entry(argc, argv, std::cout, std::cerr); }
