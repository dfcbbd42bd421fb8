fn main() {
    eprintln!("cuspnorm: not yet wired");
    std::process::exit(2);
}
