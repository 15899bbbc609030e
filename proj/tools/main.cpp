#include "cli.hpp"

int main(int argc, char** argv) { return insens::cli::run(argc, argv); }
