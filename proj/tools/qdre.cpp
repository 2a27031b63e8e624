#include "qdre/cli/cli.hpp"

int main(int argc, char** argv) { return qdre::cli::run_cli(argc, argv); }
