fn main() {
    std::process::exit(polysigma::cli::main_with_env());
}
