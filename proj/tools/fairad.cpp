#include "fairad/cli.hpp"

int main(int argc, char** argv) { return fairad::cli::run(argc, argv); }
