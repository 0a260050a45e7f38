#include <iostream>

#include "avnet/cli.hpp"

int main(int argc, char** argv) {
    return avnet::run_cli(argc, argv, std::cout, std::cerr);
}
