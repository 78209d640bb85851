fn main() {
    std::process::exit(dtfe::cli::run(std::env::args_os()));
}
