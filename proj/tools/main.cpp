#include "wavefronts/cli.hpp"

int main(int argc, char** argv) { return wavefront::cli::main(argc, argv); }
