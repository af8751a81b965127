#include "revwel/cli.hpp"

int main(int argc, char** argv) { return revwel::cli::main(argc, argv); }
