//! Composes two 2x2 kernels into the effective 3x3 kernel and verifies that
//! the cascade equals the single composed convolution on interior pixels.
//!
//! Run with: `cargo run --example effective_kernel`

use cassod::cascade::{build_cassod, CascadePostSpec, CassodVariant, WeightSource};
use cassod::tensor::{conv2d_ref, Padding, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let d = 2usize;
    let module = build_cassod(
        CassodVariant::D,
        1,
        1,
        d,
        CascadePostSpec::default(),
        WeightSource::Seeded(5),
    )
    .unwrap();

    println!("layer1 2x2 plane: {:?}", module.layer1().plane(0, 0));
    println!("layer2 2x2 plane: {:?}", module.layer2().plane(0, 0));

    let composed = module.composed_effective_kernels().unwrap();
    println!("\ncomposed 3x3 kernel on the {{-{d},0,+{d}}}^2 lattice:");
    for x in 0..3 {
        let row: String = (0..3)
            .map(|y| format!(" {:+.5}", composed.weight_dw(0, x, y)))
            .collect();
        println!("  {row}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let input = Tensor::from_fn(1, 24, 24, |_, _, _| rng.gen_range(-1.0..=1.0)).unwrap();
    let cascade = module.forward(&input).unwrap();
    let single = conv2d_ref(&input, &composed, Padding::SameZero).unwrap();

    let interior = cascade.max_abs_diff(&single, d).unwrap();
    let with_borders = cascade.max_abs_diff(&single, 0).unwrap();
    println!("\ncascade vs single composed conv on 1x24x24 input:");
    println!("  max |diff| at distance >= {d} from borders: {interior:e}");
    println!("  max |diff| including borders:              {with_borders:e}");
    println!("  (same-zero padding breaks the identity only at the borders)");
    assert!(interior < 1e-9);
}
