fn main() {
    std::process::exit(inertia_cli::run(std::env::args_os()));
}
