#include "aislenav/eval/cli.hpp"

int main(int argc, char** argv) { return aislenav::eval::cli_run(argc, argv); }
