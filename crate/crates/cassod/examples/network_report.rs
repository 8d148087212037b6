//! Parses a `.cassod-net` file, lowers it, and prints the per-layer cost
//! table (the same analysis `cassod report` exposes).
//!
//! Run with: `cargo run --example network_report`

use std::path::Path;

use cassod::hwsim::HwConfig;
use cassod::netdesc::{analyze, lower, read_network_file};

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/fem-context.cassod-net");
    let network = read_network_file(&path).unwrap();
    let hw = HwConfig::default();

    println!(
        "network `{}`, input {}x{}x{}",
        network.name, network.input_shape.0, network.input_shape.1, network.input_shape.2
    );
    let analysis = analyze(&network, &hw).unwrap();
    println!(
        "\n{:>3} {:<16} {:>2} {:>2} {:>4} {:>4} {:>8} {:>12} {:>4} {:>13} {:>13}",
        "idx", "kind", "k", "d", "in", "out", "weights", "macs", "rf", "cycles(base)", "cycles(pa)"
    );
    for l in &analysis.layers {
        println!(
            "{:>3} {:<16} {:>2} {:>2} {:>4} {:>4} {:>8} {:>12} {:>4} {:>13} {:>13}",
            l.index,
            l.kind.to_string(),
            l.base_size,
            l.dilation,
            l.c_in,
            l.c_out,
            l.weights,
            l.macs,
            l.receptive_field,
            l.cycles_baseline,
            l.cycles_pixel_array
        );
    }
    let t = &analysis.totals;
    println!(
        "{:>3} {:<16} {:>2} {:>2} {:>4} {:>4} {:>8} {:>12} {:>4} {:>13} {:>13}",
        "", "total", "", "", "", "", t.weights, t.macs, t.receptive_field,
        t.cycles_baseline, t.cycles_pixel_array
    );
    println!(
        "\nfps: baseline {:.2}, pixel-array {:.2} ({:.2}x)",
        t.fps_baseline,
        t.fps_pixel_array,
        t.fps_pixel_array / t.fps_baseline
    );

    let lowered = lower(&network);
    println!("\nlowered to {} explicit convolution layers:", lowered.layers.len());
    print!("{lowered}");
}
