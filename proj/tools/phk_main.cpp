#include "phk/cli.hpp"

int main(int argc, char** argv) { return phk::run_cli(argc, argv); }
