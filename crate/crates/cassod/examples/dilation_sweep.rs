//! Cycles per dilation rate for a 3x3 layer (64->64 channels, 128x128 maps)
//! with and without the Pixel Array, plus the CASSOD-A replacement.
//!
//! Run with: `cargo run --example dilation_sweep`

use cassod::hwsim::{layer_cycles, CycleMode, HwConfig, LayerGeometry};

fn layer(k: usize, d: usize, c_in: usize, c_out: usize, depthwise: bool) -> LayerGeometry {
    LayerGeometry {
        kind: String::new(),
        base_size: k,
        dilation: d,
        c_in,
        c_out,
        out_h: 128,
        out_w: 128,
        depthwise,
    }
}

fn main() {
    let hw = HwConfig {
        setup_cycles_per_layer: 0,
        ..HwConfig::default()
    };
    let c = 64usize;

    println!("3x3 dilated layer, {c}->{c} channels, 128x128 maps, setup = 0");
    println!(
        "{:>2} {:>16} {:>16} {:>8} {:>16}",
        "D", "baseline cycles", "pixel-array", "speedup", "CASSOD-A (pa)"
    );
    for d in 1..=3usize {
        let baseline = layer_cycles(&layer(3, d, c, c, false), &hw, CycleMode::Baseline).unwrap();
        let pa = layer_cycles(&layer(3, d, c, c, false), &hw, CycleMode::PixelArray).unwrap();
        let speedup = baseline.cycles as f64 / pa.cycles as f64;
        let cassod = if d % 2 == 0 {
            // Depthwise 2x2 plus full 2x2, both at the same rate.
            let l1 = layer_cycles(&layer(2, d, c, c, true), &hw, CycleMode::PixelArray).unwrap();
            let l2 = layer_cycles(&layer(2, d, c, c, false), &hw, CycleMode::PixelArray).unwrap();
            format!("{}", l1.cycles + l2.cycles)
        } else {
            "-".to_string()
        };
        println!(
            "{d:>2} {:>16} {:>16} {speedup:>7.2}x {cassod:>16}",
            baseline.cycles, pa.cycles
        );
    }
    println!("\npixel-array cycles do not vary with D; the baseline grows as (2D+1)^2.");
    println!("At D=2 the speedup is 25/9 = {:.2}x.", 25.0 / 9.0);
}
