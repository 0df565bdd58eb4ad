#include <string>
#include <vector>

#include "wavefis/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return wavefis::run_command(std::move(args));
}
