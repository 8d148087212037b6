//! Prints the tap footprints of 2x2 and 3x3 dilated filters and shows that
//! two cascaded 2x2 filters cover exactly the 3x3 dilated lattice.
//!
//! Run with: `cargo run --example tap_patterns`

use cassod::tensor::{footprint_side, tap_offsets};

fn render(base_size: usize, dilation: usize) {
    let offsets = tap_offsets(base_size, dilation).unwrap();
    let side = footprint_side(base_size, dilation) as i64;
    let half = (side - 1) / 2;
    println!(
        "{base_size}x{base_size} filter, D={dilation}: offsets {offsets:?}, footprint {side}x{side}"
    );
    for i in -half..=half {
        let row: String = (-half..=half)
            .map(|j| {
                if offsets.contains(&i) && offsets.contains(&j) {
                    " w"
                } else {
                    " ."
                }
            })
            .collect();
        println!("   {row}");
    }
    println!();
}

fn main() {
    for d in [2usize, 4] {
        render(2, d);
        render(3, d);
        // The cascade of two 2x2 filters reaches sums of two 2x2 offsets,
        // which is exactly the 3x3 lattice.
        let single = tap_offsets(2, d).unwrap();
        let mut reachable: Vec<i64> = single
            .iter()
            .flat_map(|a| single.iter().map(move |b| a + b))
            .collect();
        reachable.sort_unstable();
        reachable.dedup();
        let lattice = tap_offsets(3, d).unwrap();
        println!("cascaded 2x2 offsets (per axis): {reachable:?}");
        println!("3x3 dilated lattice (per axis):  {lattice:?}");
        assert_eq!(reachable, lattice);
        println!("-> identical zero-weight positions\n");
    }
}
