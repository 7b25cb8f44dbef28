#include "tinerf/cli.hpp"

int main(int argc, char** argv) { return tinerf::cli_main(argc, argv); }
