#include <iostream>

#include "pqbfl/cli.hpp"

int main(int argc, char** argv) {
    return pqbfl::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
