fn main() {
    std::process::exit(divideline::cli::main_entry());
}
