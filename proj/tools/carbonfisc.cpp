#include "carbonfisc/cli.hpp"

int main(int argc, char** argv) { return carbonfisc::cli::run(argc, argv); }
