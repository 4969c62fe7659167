fn main() {
    std::process::exit(widelin::cli::run(std::env::args_os()));
}
