#include "somfrechet/cli.hpp"

int main(int argc, char** argv)
{
    return somfrechet::cli::run(argc, argv);
}
