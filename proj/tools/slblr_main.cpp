#include "slblr/cli.hpp"

int main(int argc, char** argv) { return slblr::cli::run(argc, argv); }
