#include "newsfame/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return newsfame::cli_main(argc, argv, std::cout, std::cerr);
}
