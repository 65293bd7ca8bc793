fn main() {
    std::process::exit(ksharp::cli::run(std::env::args_os()));
}
