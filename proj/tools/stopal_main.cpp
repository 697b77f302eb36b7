#include "stopal/cli.hpp"

int main(int argc, char** argv) { return stopal::cli_main(argc, argv); }
