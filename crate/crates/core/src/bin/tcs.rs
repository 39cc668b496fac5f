fn main() {
    std::process::exit(congruence_speed::cli::main_with_env());
}
