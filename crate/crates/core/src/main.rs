fn main() {
    std::process::exit(kstab::cli::main());
}
