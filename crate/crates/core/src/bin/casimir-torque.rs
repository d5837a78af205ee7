fn main() {
    std::process::exit(casimir_torque::cli::main_with_args(std::env::args_os()));
}
