fn main() {
    std::process::exit(dtpc_di::cli::run(std::env::args_os()));
}
