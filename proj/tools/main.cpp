#include "vismas/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return vismas::run_cli(argc, argv, std::cout, std::cerr);
}
