fn main() {
    std::process::exit(hyperbt::cli::run(std::env::args_os()));
}
