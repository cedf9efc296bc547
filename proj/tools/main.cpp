#include "imforge/cli.hpp"

int main(int argc, char** argv) { return imforge::cli::run(argc, argv); }
