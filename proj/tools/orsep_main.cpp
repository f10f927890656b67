#include "orsep/cli.hpp"

int main(int argc, char** argv) { return orsep::run_cli(argc, argv); }
