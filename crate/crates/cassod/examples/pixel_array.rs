//! Demonstrates the hierarchical Pixel Array: per-stage shift selection for
//! every supported dilation rate, and a simulated gather on a small plane.
//!
//! Run with: `cargo run --example pixel_array`

use cassod::hwsim::{max_supported_dilation, pixel_array_gather, stage_selection, PixelArrayConfig};
use cassod::tensor::{tap_offsets, Tensor};

fn main() {
    let stages = 3usize;
    println!(
        "{} hierarchical stages support D in [1, {}]:",
        stages,
        max_supported_dilation(stages)
    );
    println!("{:>3}  {:>12}  reconstruction", "D", "[X0, X1, X2]");
    for d in 1..=max_supported_dilation(stages) {
        let xs = stage_selection(d, stages).unwrap();
        let terms: Vec<String> = xs
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == 1)
            .map(|(h, _)| format!("2^{h}"))
            .collect();
        println!("{d:>3}  {:>12}  {} = {d}", format!("{xs:?}"), terms.join(" + "));
    }

    // A 6x6-buffer array routing a 2x2 window with D=2 around (3, 3).
    let config = PixelArrayConfig {
        stages,
        array_height: 6,
        array_width: 6,
    };
    let plane = Tensor::from_fn(1, 6, 6, |_, i, j| (10 * i + j) as f64).unwrap();
    let center = (3usize, 3usize);
    let (k, d) = (2usize, 2usize);
    let window = pixel_array_gather(&config, &plane, 0, center, k, d).unwrap();

    println!("\n6x6 plane (values 10*i + j), gathering a {k}x{k} window at D={d} around {center:?}:");
    let offsets = tap_offsets(k, d).unwrap();
    for (x, ox) in offsets.iter().enumerate() {
        for (y, oy) in offsets.iter().enumerate() {
            println!(
                "  tap ({x},{y}) -> offset ({ox:+},{oy:+}) -> value {}",
                window[x * k + y]
            );
        }
    }

    // The routed window must equal a direct dilated read.
    let mut direct = Vec::new();
    for &ox in &offsets {
        for &oy in &offsets {
            direct.push(plane.get_padded(0, center.0 as i64 + ox, center.1 as i64 + oy));
        }
    }
    assert_eq!(window, direct);
    println!("\nrouted window == direct dilated gather");
}
