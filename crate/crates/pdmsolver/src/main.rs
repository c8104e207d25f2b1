fn main() { std::process::exit(pdmsolver::cli::run_from_env()); }
