#include "scr/cli.hpp"

int main(int argc, char** argv) { return scr::run_cli(argc, argv); }
