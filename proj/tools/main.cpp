#include "ggb/cli.hpp"

int main(int argc, char** argv) { return ggb::cli::run(argc, argv); }
