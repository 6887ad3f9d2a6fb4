fn main() {
    std::process::exit(colombeau_lab::cli::run(std::env::args_os()));
}
