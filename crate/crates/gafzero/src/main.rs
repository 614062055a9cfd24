fn main() { std::process::exit(gafzero::cli::main()); }
