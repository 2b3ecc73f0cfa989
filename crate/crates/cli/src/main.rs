fn main() {
    std::process::exit(noncollapse_cli::main_with(std::env::args_os()));
}
