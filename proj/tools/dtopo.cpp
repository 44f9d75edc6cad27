#include "dtopo/cli.hpp"

int main(int argc, char** argv) { return dtopo::cli::run(argc, argv); }
