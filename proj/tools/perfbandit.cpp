#include "perfbandit/harness/cli.hpp"

int main(int argc, char** argv) { return perfbandit::harness::cli_run(argc, argv); }
