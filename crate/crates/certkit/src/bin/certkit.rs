fn main() { std::process::exit(certkit::cli::run_from_env()); }
