#include "cocoonlab/cli.hpp"

int main(int argc, char** argv) { return cocoonlab::run_cli(argc, argv); }
