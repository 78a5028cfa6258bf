fn main() {
    std::process::exit(seqwit::cli::main());
}
