#include "ifit/cli.hpp"

int main(int argc, char** argv) { return ifit::cli::main(argc, argv); }
