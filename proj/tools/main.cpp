#include "pdeforge/cli.hpp"

int main(int argc, char** argv) { return pdeforge::run_cli(argc, argv); }
