#include "telecert/cli.hpp"

int main(int argc, char** argv) { return telecert::run_cli(argc, argv); }
