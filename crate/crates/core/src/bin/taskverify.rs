fn main() {
    std::process::exit(taskverify::cli::run(std::env::args_os()));
}
