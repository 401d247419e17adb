#include "hyla/cli.hpp"

int main(int argc, char** argv) { return hyla::cli::run(argc, argv); }
