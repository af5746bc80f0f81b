#include "attentiv/cli.hpp"

int main(int argc, char** argv) { return attentiv::cli::run(argc, argv); }
