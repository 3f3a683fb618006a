fn main() {
    std::process::exit(flowcast::cli::cli_main(std::env::args_os()));
}
