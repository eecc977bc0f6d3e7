fn main() {
    std::process::exit(bvmetric::cli::main_with_args(std::env::args_os()));
}
