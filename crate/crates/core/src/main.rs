fn main() {
    std::process::exit(drgep::cli::run(std::env::args_os()));
}
