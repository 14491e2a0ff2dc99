#include "evenspec/cli.hpp"

int main(int argc, char** argv) { return evenspec::run_cli(argc, argv); }
