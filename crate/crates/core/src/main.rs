fn main() {
    std::process::exit(qubit_estimation::cli::run(std::env::args_os()));
}
