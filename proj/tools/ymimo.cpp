#include "cli.hpp"

int main(int argc, char** argv) { return ymimo::cli::run(argc, argv); }
