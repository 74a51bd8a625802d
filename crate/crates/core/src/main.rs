use std::process::exit;

fn main() {
    exit(spellbench::cli::run(std::env::args()));
}
