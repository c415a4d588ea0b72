fn main() {
    std::process::exit(crsos_cli::main_with_args(std::env::args_os()));
}
