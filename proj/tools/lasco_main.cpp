#include "lasco/cli/cli.hpp"

int main(int argc, char** argv) { return lasco::cli::run_cli(argc, argv); }
