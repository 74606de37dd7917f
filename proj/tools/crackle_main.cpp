#include "crackle/pipeline.hpp"

int main(int argc, char** argv) { return crackle::cli_run(argc, argv); }
