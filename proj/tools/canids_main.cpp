#include "canids/cli.hpp"

int main(int argc, char** argv) { return canids::cli::run_command(argc, argv); }
