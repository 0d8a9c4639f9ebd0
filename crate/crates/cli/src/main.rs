fn main() {
    std::process::exit(wklab_cli::run(std::env::args_os()));
}
