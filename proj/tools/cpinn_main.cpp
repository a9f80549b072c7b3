#include <iostream>
#include <string>
#include <vector>

#include "cpinn/cli.hpp"

int main(int argc, char** argv) {
    cpinn::cli::tune_allocator();
    return cpinn::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
