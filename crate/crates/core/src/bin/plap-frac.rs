fn main() {
    std::process::exit(plap_frac::cli::run(std::env::args_os()));
}
