#include "mrgc/cli.hpp"

int main(int argc, char** argv) { return mrgc::cli::run(argc, argv); }
