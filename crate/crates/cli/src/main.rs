fn main() {
    std::process::exit(citelens::run(std::env::args_os()));
}
