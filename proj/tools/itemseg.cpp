#include "itemseg/cli.hpp"

int main(int argc, char** argv) { return itemseg::cli::run(argc, argv); }
