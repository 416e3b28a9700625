#include "dualpinn/cli.hpp"

int main(int argc, char** argv) { return dualpinn::cli_main(argc, argv); }
