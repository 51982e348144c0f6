#include "rmtgaps/cli_io.hpp"

int main(int argc, char** argv) { return rmtgaps::io::cli_main(argc, argv); }
