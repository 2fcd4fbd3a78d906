fn main() {
    std::process::exit(genlab::cli::run(std::env::args_os()));
}
