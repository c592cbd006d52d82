fn main() {
    std::process::exit(qitn_cli::run(std::env::args_os()));
}
