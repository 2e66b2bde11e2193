#include <ixt/cli.hpp>

int main(int argc, char **argv)
{
    return ixt::run_cli(argc, argv);
}
