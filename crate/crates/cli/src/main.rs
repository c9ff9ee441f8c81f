fn main() {
    std::process::exit(gpvortex_cli::run(std::env::args_os()));
}
