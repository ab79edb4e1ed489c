#include "pgen/cli.hpp"

int main(int argc, char** argv) { return pgen::cli_main(argc, argv); }
