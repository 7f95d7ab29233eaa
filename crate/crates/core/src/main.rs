fn main() {
    std::process::exit(lowq::cli::main_entry());
}
