fn main() {
    std::process::exit(gibbs_stein::cli::main_with_args(std::env::args_os()));
}
