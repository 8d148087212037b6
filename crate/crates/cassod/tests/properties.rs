//! Property tests for the structural invariants: depthwise/full consistency,
//! text format round-trips, and count preservation under lowering.

use std::path::Path;

use cassod::netdesc::{lower, parse_network, LayerDescriptor, LayerKind, NetworkDescriptor, WeightSpec};
use cassod::tensor::{conv2d_ref, KernelSet, Padding, Tensor};

use proptest::prelude::*;

fn tensor_strategy(max_c: usize, max_hw: usize) -> impl Strategy<Value = Tensor> {
    (1..=max_c, 1..=max_hw, 1..=max_hw).prop_flat_map(|(c, h, w)| {
        proptest::collection::vec(-1.0..1.0f64, c * h * w)
            .prop_map(move |data| Tensor::new(c, h, w, data).unwrap())
    })
}

fn weight_spec_strategy() -> impl Strategy<Value = WeightSpec> {
    prop_oneof![
        Just(WeightSpec::Zeros),
        Just(WeightSpec::Unit),
        any::<u64>().prop_map(WeightSpec::Seed),
        Just(WeightSpec::File("weights.tensor".into())),
    ]
}

/// Chain-valid random networks covering every layer kind.
fn network_strategy() -> impl Strategy<Value = NetworkDescriptor> {
    let plan = (
        0..7usize,
        1..=8usize,
        0..3usize,
        any::<bool>(),
        any::<bool>(),
        weight_spec_strategy(),
    );
    (
        "[a-z][a-z0-9-]{0,7}",
        (1..=8usize, 4..=12usize, 4..=12usize),
        proptest::collection::vec(plan, 1..5),
    )
        .prop_map(|(name, shape, plans)| {
            let mut channels = shape.0;
            let layers = plans
                .into_iter()
                .map(|(kind_sel, c_next, d_sel, bn, relu, weights)| {
                    let (kind, base_size, dilation, c_out) = match kind_sel {
                        0 => (LayerKind::Conv, [1, 3, 5][d_sel], 1, c_next),
                        1 => (LayerKind::DilatedConv, 3, d_sel + 1, c_next),
                        2 => (LayerKind::DepthwiseConv, 3, d_sel + 1, channels),
                        3 => (LayerKind::CassodA, 2, 2 * (d_sel + 1), c_next),
                        4 => (LayerKind::CassodCFirst, 2, 2 * (d_sel + 1), c_next),
                        5 => (LayerKind::CassodCSecond, 2, 2 * (d_sel + 1), c_next),
                        _ => (LayerKind::CassodD, 2, 2 * (d_sel + 1), channels),
                    };
                    // File weights are only defined for plain convolutions.
                    let weights = if kind.is_cassod() && matches!(weights, WeightSpec::File(_)) {
                        WeightSpec::Zeros
                    } else {
                        weights
                    };
                    let layer = LayerDescriptor {
                        kind,
                        base_size,
                        dilation,
                        c_in: channels,
                        c_out,
                        bn,
                        relu,
                        weights,
                    };
                    channels = c_out;
                    layer
                })
                .collect();
            NetworkDescriptor {
                name,
                input_shape: shape,
                layers,
            }
        })
}

proptest! {
    /// A depthwise convolution equals the full convolution whose
    /// cross-channel weights are zero except on the diagonal.
    #[test]
    fn depthwise_matches_diagonal_full_conv(
        input in tensor_strategy(4, 10),
        seed in any::<u64>(),
        k_and_d in prop_oneof![Just((2usize, 2usize)), Just((2, 4)), Just((3, 1)), Just((3, 3))],
    ) {
        use rand::{Rng, SeedableRng};
        let (k, d) = k_and_d;
        let channels = input.channels();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dw_weights: Vec<f64> =
            (0..channels * k * k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let dw = KernelSet::depthwise(k, d, channels, dw_weights.clone()).unwrap();

        let mut full_weights = vec![0.0; channels * channels * k * k];
        for c in 0..channels {
            for t in 0..k * k {
                full_weights[(c * channels + c) * k * k + t] = dw_weights[c * k * k + t];
            }
        }
        let full = KernelSet::full(k, d, channels, channels, full_weights).unwrap();

        let a = conv2d_ref(&input, &dw, Padding::SameZero).unwrap();
        let b = conv2d_ref(&input, &full, Padding::SameZero).unwrap();
        prop_assert_eq!(a.max_abs_diff(&b, 0).unwrap(), 0.0);
    }

    /// Printing a descriptor and re-parsing it yields a structurally equal
    /// descriptor.
    #[test]
    fn network_print_parse_round_trip(network in network_strategy()) {
        let text = network.to_string();
        let parsed = parse_network(&text)
            .map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(parsed, network);
    }

    /// Lowering never changes the total stored weight count.
    #[test]
    fn lowering_preserves_weight_totals(network in network_strategy()) {
        let lowered = lower(&network);
        let original: u64 = network.layers.iter().map(|l| l.weight_count()).sum();
        let total: u64 = lowered.layers.iter().map(|l| l.weight_count()).sum();
        prop_assert_eq!(original, total);
        // And lowering is idempotent.
        prop_assert_eq!(lower(&lowered), lowered);
    }

    /// The tensor text format is lossless for finite values.
    #[test]
    fn tensor_file_round_trip(tensor in tensor_strategy(3, 6)) {
        let mut buf = Vec::new();
        tensor.write_to(&mut buf).unwrap();
        let back = Tensor::read_from(&buf[..], Path::new("<mem>")).unwrap();
        prop_assert_eq!(back, tensor);
    }
}
