#include "cli.hpp"

int main(int argc, char** argv) { return sap::cli::run(argc, argv); }
