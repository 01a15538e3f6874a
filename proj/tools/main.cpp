#include "statarb/cli.hpp"

int main(int argc, char** argv) { return statarb::run_cli(argc, argv); }
