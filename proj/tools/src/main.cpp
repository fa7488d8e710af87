#include "cli.hpp"
int main(int argc, char** argv) { return mgv::cli::run(argc, argv); }
