fn main() {
    std::process::exit(antdyn::cli::main(std::env::args_os()));
}
