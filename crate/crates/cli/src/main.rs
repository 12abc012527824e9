fn main() {
    std::process::exit(extremal_lab::main_with_args(std::env::args_os()));
}
