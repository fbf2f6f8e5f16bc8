#include "roadsafe/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return roadsafe::cli::run(argc, argv, std::cout, std::cerr);
}
