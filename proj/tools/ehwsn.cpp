#include "ehwsn/cli.hpp"

int main(int argc, char** argv) { return ehwsn::cli::run(argc, argv); }
