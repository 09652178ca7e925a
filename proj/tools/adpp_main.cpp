#include <iostream>

#include "adpp/cli.hpp"

int main(int argc, char** argv) { return adpp::cli_dispatch(argc, argv, std::cout, std::cerr); }
