fn main() {
    std::process::exit(phasequant::cli::run(std::env::args_os()));
}
