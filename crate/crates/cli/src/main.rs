fn main() {
    std::process::exit(seqcast_cli::run_cli(std::env::args_os()));
}
