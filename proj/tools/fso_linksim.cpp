#include "fso/cli/app.hpp"

int main(int argc, char** argv) { return fso::cli::run(argc, argv); }
