fn main() {
    std::process::exit(wsn_coverage::cli::run(std::env::args_os()));
}
