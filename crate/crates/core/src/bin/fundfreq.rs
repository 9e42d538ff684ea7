fn main() {
    std::process::exit(fundfreq::cli::main_with_args(std::env::args_os()));
}
