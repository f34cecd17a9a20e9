fn main() {
    std::process::exit(symreach::cli::main());
}
