fn main() {
    std::process::exit(treepin::run(std::env::args_os()));
}
