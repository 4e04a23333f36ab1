fn main() {
    std::process::exit(hkb::run(std::env::args()));
}
