fn main() {
    std::process::exit(depsketch::cli::run(std::env::args_os()));
}
