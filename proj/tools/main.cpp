#include "gsv/cli.hpp"

int main(int argc, char** argv) { return gsv::cli_main(argc, argv); }
