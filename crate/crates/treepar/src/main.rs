fn main() {
    std::process::exit(treepar::cli::run(std::env::args_os()));
}
