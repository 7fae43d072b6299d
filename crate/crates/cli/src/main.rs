fn main() {
    std::process::exit(depthrank_cli::main_entry());
}
