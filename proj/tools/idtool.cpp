#include "idset/cli.hpp"

int main(int argc, char** argv) { return idset::cli::main(argc, argv); }
