#include "testgen/cli.hpp"

int main(int argc, char** argv) { return testgen::cli_main(argc, argv); }
