fn main() {
    std::process::exit(sclera_sim::cli::main_with_args(std::env::args_os()));
}
