fn main() {
    std::process::exit(ifm_noise::cli::main_with_args(std::env::args_os()));
}
