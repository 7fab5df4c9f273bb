#include "gazefilt/cli.hpp"

int main(int argc, char** argv) {
    return gazefilt::cli::cli_dispatch(argc, argv);
}
