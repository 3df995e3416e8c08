#include "fockpass/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return fockpass::cli::main_entry(argc, argv, std::cout, std::cerr);
}
