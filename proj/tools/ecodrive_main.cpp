#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return ecodrive::cli::run(argc, argv, std::cout, std::cerr); }
