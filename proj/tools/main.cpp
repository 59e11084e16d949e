#include "ssi/cli.hpp"

int main(int argc, char** argv) { return ssi::cli_main(argc, argv); }
