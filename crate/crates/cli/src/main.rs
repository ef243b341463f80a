fn main() {
    std::process::exit(gutmanlab::run(std::env::args_os()));
}
