#include "t2v/cli.hpp"

int main(int argc, char** argv) { return t2v::cli::run(argc, argv); }
