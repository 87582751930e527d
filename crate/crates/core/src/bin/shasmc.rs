fn main() {
    std::process::exit(shasmc::cli::run(std::env::args_os()));
}
