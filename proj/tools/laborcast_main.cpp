#include "laborcast/cli.hpp"

int main(int argc, char** argv) { return laborcast::cli_main(argc, argv); }
