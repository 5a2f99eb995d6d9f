#include "phg/cli.hpp"

int main(int argc, char** argv) { return phg::cli_main(argc, argv); }
