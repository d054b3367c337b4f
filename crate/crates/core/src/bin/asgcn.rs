fn main() {
    std::process::exit(asgcn::cli::main());
}
