fn main() {
    std::process::exit(twac::cli::run(std::env::args_os()));
}
