fn main() {
    std::process::exit(aidlab::labctl::cli::cli_dispatch(std::env::args_os()));
}
