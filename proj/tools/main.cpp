#include "cli.hpp"

int main(int argc, char** argv) { return meshdist::cli::main(argc, argv); }
