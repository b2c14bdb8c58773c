fn main() {
    std::process::exit(hisearch::cli::main_with(std::env::args_os()));
}
