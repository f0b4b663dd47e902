#include "snaptriage/cli.hpp"

int main(int argc, char** argv) { return snaptriage::cli::run(argc, argv); }
