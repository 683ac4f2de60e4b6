fn main() { std::process::exit(lodisc::cli::run()); }
