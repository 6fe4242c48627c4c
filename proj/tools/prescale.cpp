#include "prescale/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return prescale::run_cli(argc, argv, std::cout, std::cerr);
}
