#include "cli.hpp"

int main(int argc, char** argv) { return robust_unmix::cli::run(std::vector<std::string>(argv, argv + argc)); }
