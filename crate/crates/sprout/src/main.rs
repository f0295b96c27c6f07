use std::process::exit;

fn main() {
    exit(sprout::cli::run_cli(std::env::args_os()));
}
