#include "epiplan/cli.hpp"

int main(int argc, char **argv) { return epiplan::run_cli(argc, argv); }
