#include "cbf/cli.hpp"

int main(int argc, char** argv) { return cbf::cli::main_entry(argc, argv); }
