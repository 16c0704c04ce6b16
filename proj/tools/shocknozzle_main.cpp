#include "shocknozzle/cli.hpp"

int main(int argc, char** argv) { return shocknozzle::run_cli(argc, argv); }
