#include <string>
#include <vector>

#include "binormal/io.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return binormal::cli_dispatch(args);
}
