fn main() {
    std::process::exit(dialogue_revision::cli::main_with(std::env::args_os()));
}
