fn main() {
    let code = compsel::cli::run(std::env::args_os());
    std::process::exit(code);
}
