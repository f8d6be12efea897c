// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#include "datascout/cli.hpp"

int main(int argc, char** argv) { return datascout::cli::run(argc, argv); }
