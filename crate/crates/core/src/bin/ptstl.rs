fn main() {
    std::process::exit(ptstl::cli::run(std::env::args_os()));
}
