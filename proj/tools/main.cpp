#include "floorlab/cli.hpp"

int main(int argc, char** argv) { return floorlab::cli_main(argc, argv); }
