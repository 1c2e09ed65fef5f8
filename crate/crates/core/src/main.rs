fn main() {
    std::process::exit(hzspf::cli::run(std::env::args_os()));
}
