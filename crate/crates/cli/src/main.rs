// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

use clap::Parser;
use fockstab_cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
