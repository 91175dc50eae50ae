fn main() {
    std::process::exit(avgmix_cli::run(std::env::args_os()));
}
