fn main() {
    std::process::exit(loewner_lab::harness::main_with_args(std::env::args_os()));
}
