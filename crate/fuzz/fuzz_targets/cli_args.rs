#![no_main]

use clap::Parser;
use libfuzzer_sys::fuzz_target;
use seqwit::cli::Cli;

// NUL-separated argv; only parsing runs, so no files are touched
fuzz_target!(|data: &[u8]| {
    let args = data
        .split(|&b| b == 0)
        .map(|chunk| String::from_utf8_lossy(chunk).into_owned());
    let _ = Cli::try_parse_from(std::iter::once("seqwit".to_string()).chain(args));
});
