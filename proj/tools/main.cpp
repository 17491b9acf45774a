#include <iostream>

#include "koopman/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return koopman::run_cli(args, std::cin, std::cout, std::cerr);
}
