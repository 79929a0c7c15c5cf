#include <opthim/cli.hpp>

int main(int argc, char** argv) { return opthim::cli_main(argc, argv); }
