#include <string>
#include <vector>

#include "magshape/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return magshape::cli::run(args);
}
