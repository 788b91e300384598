fn main() {
    std::process::exit(biphoton_cli::run(std::env::args_os()));
}
