fn main() {
    std::process::exit(outline_energy::cli::main_with_args(std::env::args_os()));
}
