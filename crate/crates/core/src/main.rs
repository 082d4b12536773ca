fn main() {
    std::process::exit(pprls::cli::run(std::env::args_os()));
}
