fn main() {
    std::process::exit(tabgen::cli::run(std::env::args_os()));
}
