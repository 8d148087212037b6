//! Runs the 2x2 dilated convolution against the brute-force reference on
//! random data and shows the impulse response.
//!
//! Run with: `cargo run --example oracle_check`

use cassod::tensor::{conv2d_ref, dilated_conv_2x2, KernelSet, Padding, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    for d in [2usize, 4, 6] {
        let (c_in, c_out, h, w) = (3, 4, 24, 24);
        let weights: Vec<f64> = (0..c_out * c_in * 4)
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect();
        let kernels = KernelSet::full(2, d, c_in, c_out, weights).unwrap();
        let input = Tensor::from_fn(c_in, h, w, |_, _, _| rng.gen_range(-1.0..=1.0)).unwrap();

        let fast = dilated_conv_2x2(&input, &kernels, Padding::SameZero).unwrap();
        let oracle = conv2d_ref(&input, &kernels, Padding::SameZero).unwrap();
        let diff = fast.max_abs_diff(&oracle, 0).unwrap();
        println!("D={d}: {c_in}x{h}x{w} -> {c_out}x{h}x{w}, max |fast - reference| = {diff:e}");
        assert_eq!(diff, 0.0);
    }

    // Impulse response: the four weights land mirrored at offsets +/- D/2.
    let d = 2;
    let kernels = KernelSet::full(2, d, 1, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let input = Tensor::unit_impulse(1, 7, 7, (0, 3, 3));
    let out = dilated_conv_2x2(&input, &kernels, Padding::SameZero).unwrap();
    println!("\nimpulse response of 2x2 kernel [1 2; 3 4] at D={d}:");
    for i in 0..7 {
        let row: String = (0..7)
            .map(|j| format!(" {:3}", out.get(0, i, j)))
            .collect();
        println!("  {row}");
    }
}
