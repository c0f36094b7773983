#include "icas/cli.hpp"

int main(int argc, char **argv) { return icas::run_cli(argc, argv); }
