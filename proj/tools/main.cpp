#include "tcgreen/cli/commands.hpp"

int main(int argc, char** argv) { return tcgreen::cli::run_cli(argc, argv); }
