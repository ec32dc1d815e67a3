fn main() {
    std::process::exit(hexlat_cli::run(std::env::args_os()));
}
