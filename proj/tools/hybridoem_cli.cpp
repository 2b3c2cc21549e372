#include "hybridoem/cli.hpp"

int main(int argc, char** argv) { return hoem::run_command(argc, argv); }
