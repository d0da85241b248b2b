fn main() {
    std::process::exit(locspec::cli::main());
}
