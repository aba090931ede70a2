#include "mjls/cli.hpp"

int main(int argc, char** argv) { return mjls::run_cli(argc, argv); }
