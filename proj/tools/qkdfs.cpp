#include "qkdfs/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return qkdfs::cli::run(argc, argv, std::cout, std::cerr); }
