#include <invsrc/cli.hpp>

int main(int argc, char** argv) { return invsrc::run_cli(argc, argv); }
