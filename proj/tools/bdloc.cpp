// SPDX-License-Identifier: Apache-2.0

#include "bdloc/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return bdloc::run_cli(argc, argv, std::cout, std::cerr);
}
