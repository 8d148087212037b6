//! Builds a CASSOD-A module, runs a forward pass, and compares its size
//! against the 3x3 dilated convolution it replaces.
//!
//! Run with: `cargo run --example cassod_forward`

use cassod::cascade::{
    build_cassod, conv_weight_count, CascadePostSpec, CassodVariant, PostSpec, WeightSource,
};
use cassod::tensor::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let (c1, c2, d) = (64usize, 64usize, 2usize);
    let module = build_cassod(
        CassodVariant::A,
        c1,
        c2,
        d,
        CascadePostSpec {
            layer1: PostSpec { bn: true, relu: true },
            layer2: PostSpec::default(),
        },
        WeightSource::Seeded(7),
    )
    .unwrap();

    println!(
        "CASSOD-A module: depthwise {c1}ch 2x2 (D={d}) -> BN+ReLU -> full {c1}->{c2} 2x2 (D={d})"
    );
    println!(
        "weights: layer1 {} + layer2 {} = {}",
        module.layer1().weight_count(),
        module.layer2().weight_count(),
        module.weight_count()
    );
    let dilated = conv_weight_count(3, c1, c2, false);
    println!(
        "3x3 dilated equivalent: {dilated} weights -> ratio {:.4} (4/9 = {:.4})",
        module.weight_count() as f64 / dilated as f64,
        4.0 / 9.0
    );

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let input = Tensor::from_fn(c1, 32, 32, |_, _, _| rng.gen_range(-1.0..=1.0)).unwrap();
    let out = module.forward(&input).unwrap();
    let mean = out.data().iter().sum::<f64>() / out.data().len() as f64;
    let peak = out.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!(
        "forward {}x{}x{} -> {}x{}x{}: mean {mean:.4}, max |v| {peak:.4}",
        c1,
        32,
        32,
        out.channels(),
        out.height(),
        out.width()
    );
    println!(
        "MACs for this output size: {}",
        module.mac_count(out.height(), out.width())
    );
}
