#include <iostream>

#include "failsafe/cli.hpp"

int main(int argc, char** argv) {
    try {
        return failsafe::cli::run(argc, argv, std::cout, std::cerr);
    } catch (const failsafe::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failsafe::cli::kUsage;
    }
}
