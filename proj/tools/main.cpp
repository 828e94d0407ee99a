#include "cli_app.hpp"

int main(int argc, char** argv) { return csopt::cli::run_main(argc, argv); }
