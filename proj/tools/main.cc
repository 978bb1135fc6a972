#include "xlene/cli.h"

int main(int argc, char** argv) { return xlene::run_cli(argc, argv); }
