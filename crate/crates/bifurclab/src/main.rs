fn main() {
    std::process::exit(bifurclab::cli::run(std::env::args_os()));
}
