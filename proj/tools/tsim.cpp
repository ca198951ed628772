#include "tsim/cli.hpp"

int main(int argc, char** argv) { return tsim::cli::cli_main(argc, argv); }
