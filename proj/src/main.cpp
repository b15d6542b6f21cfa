#include "tusla/cli.hpp"

int main(int argc, char** argv) { return tusla::run_cli(argc, argv); }
