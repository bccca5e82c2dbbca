#include "mvrank/cli.h"

int main(int argc, char** argv) { return mvrank::RunCli(argc, argv); }
