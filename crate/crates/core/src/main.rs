fn main() {
    std::process::exit(glsop::cli::run(std::env::args_os()));
}
