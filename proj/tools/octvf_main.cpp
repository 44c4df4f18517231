#include "octvf/cli.hpp"

int main(int argc, char** argv) {
    return octvf::run_cli(argc, argv);
}
