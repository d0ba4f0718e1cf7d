fn main() {
    std::process::exit(incidence_lab::cli::run(std::env::args_os()));
}
