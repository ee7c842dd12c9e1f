#include "hyperfem/runner.hpp"

int main(int argc, char** argv) { return hyperfem::cli_main(argc, argv); }
