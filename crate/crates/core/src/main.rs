fn main() {
    std::process::exit(lqcalc::exprio::run_cli(std::env::args_os()));
}
