#include "cohinfo/cli.hpp"

int main(int argc, char** argv) { return cohinfo::cli_main(argc, argv); }
