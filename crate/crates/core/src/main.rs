fn main() {
    std::process::exit(roletransfer::cli::run(std::env::args_os()));
}
