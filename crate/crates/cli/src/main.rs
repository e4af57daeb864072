fn main() {
    std::process::exit(ro_ac0_cli::main_with_args(std::env::args_os()));
}
