#include <iostream>

#include "dnsaudit/cli.hpp"

int main(int argc, char** argv) { return dnsaudit::run_cli(argc, argv, std::cout, std::cerr); }
