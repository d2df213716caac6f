#include "punq/cli.hpp"

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char **argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return punq::run_cli(args, std::cout, std::cerr);
}
