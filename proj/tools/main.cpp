#include "bgcn/cli.hpp"

int main(int argc, char** argv) { return bgcn::run_cli(argc, argv); }
