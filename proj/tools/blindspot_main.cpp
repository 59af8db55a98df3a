#include "blindspot/cli.hpp"

int main(int argc, char** argv) { return blindspot::cli_main(argc, argv); }
