fn main() {
    std::process::exit(lesion_eval::cli::run_from_args(std::env::args_os()));
}
