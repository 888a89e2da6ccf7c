fn main() {
    std::process::exit(ivp_cli::run(std::env::args_os()));
}
