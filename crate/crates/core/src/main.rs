fn main() {
    std::process::exit(cycloscan::cli::run(std::env::args_os()));
}
