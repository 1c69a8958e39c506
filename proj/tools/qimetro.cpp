#include "qimetro/cli.hpp"

int main(int argc, char** argv) { return qimetro::cli_main(argc, argv); }
