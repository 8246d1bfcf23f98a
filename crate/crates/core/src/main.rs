fn main() {
    std::process::exit(reynolds::cli::main());
}
