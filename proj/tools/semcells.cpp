#include "semcells/cli.hpp"

int main(int argc, char** argv) { return semcells::cli::main(argc, argv); }
