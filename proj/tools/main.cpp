#include "crisislens/cli/cli.hpp"

int main(int argc, char** argv) { return crisislens::cli::run(argc, argv); }
