#include <iostream>
#include <string>
#include <vector>

#include "fundoscope/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return fundoscope::run_cli(args, std::cout, std::cerr);
}
