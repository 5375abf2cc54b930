#include "dsviz/cli.hpp"

int main(int argc, char** argv) { return dsviz::cli::run(argc, argv); }
