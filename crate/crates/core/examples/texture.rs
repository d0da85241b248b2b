//! Writes a seeded synthetic texture PGM: `texture <height> <width> <seed> <out.pgm>`.

use locspec::datasets::{synthetic_texture, write_pgm};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() != 4 {
        eprintln!("usage: texture <height> <width> <seed> <out.pgm>");
        std::process::exit(2);
    }
    let parse = |s: &str| {
        s.parse::<u64>()
            .unwrap_or_else(|_| panic!("not a number: {s}"))
    };
    let img = synthetic_texture(
        parse(&args[0]) as usize,
        parse(&args[1]) as usize,
        parse(&args[2]),
    )
    .expect("valid size");
    std::fs::write(&args[3], write_pgm(&img)).expect("write output");
}
