fn main() {
    std::process::exit(nv_lab::cli::run_from(std::env::args_os()));
}
