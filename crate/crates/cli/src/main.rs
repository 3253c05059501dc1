fn main() {
    std::process::exit(fdrkit_cli::run(std::env::args_os()));
}
