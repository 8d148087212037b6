//! Gate-count model of the accelerator: the Pixel Array grows linearly with
//! its stage count on top of a fixed base.
//!
//! Run with: `cargo run --example gate_model`

use cassod::hwsim::{gate_count, max_supported_dilation, HwConfig};

fn main() {
    let hw = HwConfig::default();
    println!(
        "base {:.2}M gates, {:.4}M gates per stage, clock {:.0} MHz, peak {:.1} GOPS",
        hw.base_gates / 1e6,
        hw.gates_per_stage / 1e6,
        hw.clock_hz / 1e6,
        hw.peak_ops_per_second() / 1e9
    );
    println!(
        "\n{:>2} {:>8} {:>14} {:>12} {:>7}",
        "H", "max D", "pixel array", "total", "share"
    );
    for h in 0..=6usize {
        let g = gate_count(h, &hw);
        let max_d = if h == 0 {
            "-".to_string()
        } else {
            max_supported_dilation(h).to_string()
        };
        println!(
            "{h:>2} {max_d:>8} {:>13.3}M {:>11.3}M {:>6.1}%",
            g.pixel_array_gates / 1e6,
            g.total_gates / 1e6,
            g.pixel_array_share * 100.0
        );
    }

    let g3 = gate_count(3, &hw);
    let g0 = gate_count(0, &hw);
    println!(
        "\nH=3 serves D in [1, 7] with {:.1}% of the area ({:.2}x the no-array cost)",
        g3.pixel_array_share * 100.0,
        g3.total_gates / g0.total_gates
    );
}
