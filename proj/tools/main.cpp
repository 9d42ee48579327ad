#include "taskmap/cli.hpp"

int main(int argc, char** argv) {
    return taskmap::cli::run_cli({argv + 1, argv + argc});
}
