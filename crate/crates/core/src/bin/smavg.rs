fn main() {
    std::process::exit(smavg::cli::run(std::env::args_os()));
}
