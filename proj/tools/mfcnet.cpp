#include <iostream>

#include "mfc/cli.hpp"

int main(int argc, char** argv) {
    return mfc::run_cli(argc, argv, std::cout, std::cerr);
}
