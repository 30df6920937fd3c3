fn main() {
    std::process::exit(monopole::cli_io::cli_main(std::env::args_os()));
}
