#include <iostream>

#include "lvr/cli.hpp"

int main(int argc, char** argv) {
    lvr::tune_allocator();
    return lvr::cli_main(argc, argv, std::cout, std::cerr);
}
