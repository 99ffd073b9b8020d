fn main() {
    std::process::exit(sps2::cli::run(std::env::args_os()));
}
