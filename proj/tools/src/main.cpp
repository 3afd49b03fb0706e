// SPDX-License-Identifier: Apache-2.0
#include "fblab_cli/cli.hpp"

int main(int argc, char** argv) { return fblab::cli::run_cli(argc, argv); }
