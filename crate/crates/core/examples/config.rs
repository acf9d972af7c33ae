//! Parse an experiment config and print the resolved form.

use rgpo_track::cli::{parse_config, render_config};

const TEXT: &str = "\
scenario = 4
runs = 20
trackers = adaptive, clairvoyant
attack.1.start = 5
attack.1.end = 60
attack.1.v_po = 4
lambda_1 = 2.5
";

fn main() {
    match parse_config(TEXT) {
        Ok(cfg) => print!("{}", render_config(&cfg)),
        Err(e) => eprintln!("{e}"),
    }
    if let Err(e) = parse_config("runs = 3\nwidth = 2\n") {
        println!("rejected: {e}");
    }
}
