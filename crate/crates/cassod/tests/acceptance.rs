//! Acceptance suite: one test per claim the toolkit must reproduce, each
//! printing a PASS/FAIL line (`cargo test --test acceptance -- --nocapture`).

use cassod::cascade::{
    build_cassod, cassod_weight_count, conv_weight_count, CascadePostSpec, CassodVariant,
    WeightSource,
};
use cassod::hwsim::{
    check_pixel_array_support, gate_count, layer_cycles, max_supported_dilation, network_cycles,
    pixel_array_gather, stage_selection, CycleMode, HwConfig, LayerGeometry, PixelArrayConfig,
};
use cassod::netdesc::{self, parse_network};
use cassod::tensor::{
    conv2d_ref, dilated_conv_2x2, max_tap_offset, tap_offsets, KernelSet, Padding, Tensor,
};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn criterion(number: u32, name: &str, f: impl FnOnce() -> Result<(), String>) {
    match f() {
        Ok(()) => println!("criterion {number} ({name}): PASS"),
        Err(msg) => {
            println!("criterion {number} ({name}): FAIL - {msg}");
            panic!("criterion {number} ({name}): {msg}");
        }
    }
}

macro_rules! check {
    ($cond:expr, $($arg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($arg)+)),
        }
    };
}

fn zero_setup() -> HwConfig {
    HwConfig {
        setup_cycles_per_layer: 0,
        ..HwConfig::default()
    }
}

fn fig7_layer(d: usize) -> LayerGeometry {
    LayerGeometry {
        kind: "dilated-conv".into(),
        base_size: 3,
        dilation: d,
        c_in: 64,
        c_out: 64,
        out_h: 128,
        out_w: 128,
        depthwise: false,
    }
}

#[test]
fn criterion_01_speedup_claim() {
    criterion(1, "2.78x speedup for 3x3 at D=2", || {
        let hw = zero_setup();
        let layer = fig7_layer(2);
        let baseline = layer_cycles(&layer, &hw, CycleMode::Baseline).map_err(|e| e.to_string())?;
        let pa = layer_cycles(&layer, &hw, CycleMode::PixelArray).map_err(|e| e.to_string())?;
        let ratio = baseline.cycles as f64 / pa.cycles as f64;
        check!(
            (ratio - 25.0 / 9.0).abs() < 0.01,
            "cycle ratio {ratio} differs from 25/9"
        );
        Ok(())
    });
}

#[test]
fn criterion_02_flat_pixel_array_cycles() {
    criterion(2, "pixel-array cycles flat in D, baseline grows as (2D+1)^2", || {
        let hw = zero_setup();
        let mut pa_cycles = Vec::new();
        let mut baseline_cycles = Vec::new();
        for d in 1..=3 {
            let layer = fig7_layer(d);
            pa_cycles.push(
                layer_cycles(&layer, &hw, CycleMode::PixelArray)
                    .map_err(|e| e.to_string())?
                    .cycles,
            );
            baseline_cycles.push(
                layer_cycles(&layer, &hw, CycleMode::Baseline)
                    .map_err(|e| e.to_string())?
                    .cycles,
            );
        }
        check!(
            pa_cycles.iter().all(|&c| c == pa_cycles[0]),
            "pixel-array cycles vary with D: {pa_cycles:?}"
        );
        for (i, &cycles) in baseline_cycles.iter().enumerate() {
            let d = (i + 1) as u64;
            let taps = (2 * d + 1) * (2 * d + 1);
            check!(
                cycles * 9 == baseline_cycles[0] * taps,
                "baseline cycles at D={d} not proportional to (2D+1)^2: {baseline_cycles:?}"
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_03_weight_ratios() {
    criterion(3, "weight ratios: 0.4514 at C=64, limit 4/9, exact 8/9", || {
        let a = cassod_weight_count(CassodVariant::A, 64, 64);
        let full = conv_weight_count(3, 64, 64, false);
        check!(a == 4 * 64 * 65, "CASSOD-A count {a} != 4*64*65");
        check!(full == 36864, "3x3 dilated count {full} != 36864");
        let ratio = a as f64 / full as f64;
        let expected = 4.0 * 64.0 * 65.0 / 36864.0;
        check!(
            (ratio - expected).abs() < 1e-12,
            "ratio {ratio} != {expected}"
        );

        let wide = cassod_weight_count(CassodVariant::A, 64, 4096) as f64
            / conv_weight_count(3, 64, 4096, false) as f64;
        check!(wide <= 0.445, "ratio at C2=4096 is {wide}, above 0.445");

        for c in [1usize, 16, 64, 256] {
            for variant in [CassodVariant::CFirst, CassodVariant::CSecond] {
                let lhs = cassod_weight_count(variant, c, c) * 9;
                let rhs = conv_weight_count(3, c, c, false) * 8;
                check!(lhs == rhs, "CASSOD-C ratio at C={c} is not exactly 8/9");
            }
            let lhs = cassod_weight_count(CassodVariant::D, c, c) * 9;
            let rhs = conv_weight_count(3, c, c, true) * 8;
            check!(lhs == rhs, "CASSOD-D ratio at C={c} is not exactly 8/9");
        }
        Ok(())
    });
}

#[test]
fn criterion_04_context_module_parameter_ratio() {
    criterion(4, "context-module parameter ratio 10912/23040 = 47%", || {
        // Printed parameter totals of the face-detection context module:
        // 23040 with plain dilated convolutions, 10912 with the CASSOD-A
        // replacement.
        let ratio = 10912.0_f64 / 23040.0;
        check!(
            (ratio - 0.4736).abs() < 5e-5,
            "ratio {ratio} differs from 0.4736"
        );
        check!(
            (ratio * 100.0).round() == 47.0,
            "ratio {ratio} does not round to 47%"
        );
        Ok(())
    });
}

#[test]
fn criterion_05_cascade_equivalence_oracle() {
    criterion(5, "CASSOD-D equals composed 3x3 dilated conv (200 cases)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xCA5C0D);
        for case in 0..200 {
            let d = [2usize, 4, 6][rng.gen_range(0..3)];
            let channels = rng.gen_range(1..=3usize);
            let h = rng.gen_range(2 * d + 1..=32);
            let w = rng.gen_range(2 * d + 1..=32);
            let module = build_cassod(
                CassodVariant::D,
                channels,
                channels,
                d,
                CascadePostSpec::default(),
                WeightSource::Seeded(rng.gen()),
            )
            .map_err(|e| e.to_string())?;
            let input =
                Tensor::from_fn(channels, h, w, |_, _, _| rng.gen_range(-1.0..=1.0)).unwrap();
            let cascade = module.forward(&input).map_err(|e| e.to_string())?;
            let composed = module
                .composed_effective_kernels()
                .map_err(|e| e.to_string())?;
            let single =
                conv2d_ref(&input, &composed, Padding::SameZero).map_err(|e| e.to_string())?;
            let diff = cascade.max_abs_diff(&single, d).unwrap();
            check!(
                diff < 1e-9,
                "case {case} (D={d}, {channels}x{h}x{w}): interior diff {diff}"
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_06_gather_equivalence_exhaustive() {
    criterion(6, "pixel-array gather equals direct gather (exhaustive)", || {
        let cfg = PixelArrayConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0x6A7);
        let plane = Tensor::from_fn(1, 16, 16, |_, _, _| rng.gen_range(-1.0..=1.0)).unwrap();
        let mut checked = 0usize;
        for (k, rates) in [(2usize, vec![2usize, 4, 6]), (3, vec![1, 2, 3])] {
            for d in rates {
                check_pixel_array_support(k, d, cfg.stages, 7).map_err(|e| e.to_string())?;
                let offsets = tap_offsets(k, d).unwrap();
                let margin = max_tap_offset(k, d).unwrap();
                for i in margin..16 - margin {
                    for j in margin..16 - margin {
                        let window = pixel_array_gather(&cfg, &plane, 0, (i, j), k, d)
                            .map_err(|e| e.to_string())?;
                        let mut direct = Vec::with_capacity(k * k);
                        for &ox in &offsets {
                            for &oy in &offsets {
                                direct.push(plane.get_padded(0, i as i64 + ox, j as i64 + oy));
                            }
                        }
                        check!(
                            window == direct,
                            "mismatch at k={k} D={d} center ({i},{j})"
                        );
                        checked += 1;
                    }
                }
            }
        }
        check!(checked > 0, "no centers checked");
        Ok(())
    });
}

#[test]
fn criterion_07_stage_selection_exhaustive() {
    criterion(7, "stage selection round-trips for H=1..6", || {
        for stages in 1..=6usize {
            let max = max_supported_dilation(stages);
            for d in 1..=max {
                let xs = stage_selection(d, stages).map_err(|e| e.to_string())?;
                check!(
                    xs.iter().all(|&x| x <= 1),
                    "H={stages} D={d}: non-binary selection {xs:?}"
                );
                let sum: usize = xs.iter().enumerate().map(|(h, &x)| (x as usize) << h).sum();
                check!(sum == d, "H={stages} D={d}: reconstructed {sum}");
            }
            check!(
                stage_selection(max + 1, stages).is_err(),
                "H={stages}: D={} not rejected",
                max + 1
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_08_gate_model() {
    criterion(8, "gate model: 0.5M/2.4M at H=3, affine in H, <3x scaling", || {
        let hw = HwConfig::default();
        let g3 = gate_count(3, &hw);
        check!(
            (g3.pixel_array_gates - 0.5e6).abs() < 1.0,
            "pixel-array gates {} != 0.5M",
            g3.pixel_array_gates
        );
        check!(
            (g3.total_gates - 2.4e6).abs() < 1.0,
            "total gates {} != 2.4M",
            g3.total_gates
        );
        check!(
            g3.pixel_array_share >= 0.20 && g3.pixel_array_share <= 0.21,
            "share {} outside [20%, 21%]",
            g3.pixel_array_share
        );
        for h in 0..6usize {
            let inc = gate_count(h + 1, &hw).total_gates - gate_count(h, &hw).total_gates;
            check!(
                (inc - hw.gates_per_stage).abs() < 1e-6,
                "increment at H={h} is {inc}, not {}",
                hw.gates_per_stage
            );
        }
        let scaling = g3.total_gates / gate_count(0, &hw).total_gates;
        check!(scaling < 3.0, "total(H=3)/total(H=0) = {scaling} >= 3");
        Ok(())
    });
}

#[test]
fn criterion_09_network_level_substitution() {
    criterion(9, "10-layer network: exact tap-ratio savings, CASSOD bound", || {
        let dilated: Vec<LayerGeometry> = (0..10).map(|_| fig7_layer(2)).collect();
        let hw = HwConfig::default();
        let baseline =
            network_cycles(&dilated, &hw, CycleMode::Baseline).map_err(|e| e.to_string())?;
        let pa = network_cycles(&dilated, &hw, CycleMode::PixelArray).map_err(|e| e.to_string())?;
        // Per layer, the pixel array saves exactly (25 - 9) taps * channel
        // product * pixels / lanes; setup cancels.
        let per_layer = (25 - 9) * 64 * 64 * 128 * 128 / hw.macs_per_cycle;
        for (b, p) in baseline.entries.iter().zip(&pa.entries) {
            check!(
                b.cycles - p.cycles == per_layer,
                "layer {}: saving {} != {per_layer}",
                b.layer_index,
                b.cycles - p.cycles
            );
        }
        check!(
            baseline.total_cycles - pa.total_cycles == 10 * per_layer,
            "total saving mismatch"
        );

        // CASSOD-A replacement: strictly cheaper iff the per-layer setup is
        // below (9C^2 - 4C(1+C)) * pixels / lanes = 647168 cycles.
        let text_dilated = fig7_net("dilated-conv k=3 d=2 in=64 out=64");
        let text_cassod = fig7_net("cassod-a k=2 d=2 in=64 out=64");
        let bound = (9 * 64 * 64 - 4 * 64 * 65) * 128 * 128 / hw.macs_per_cycle;
        check!(bound == 647168, "setup bound {bound} != 647168");
        for (setup, expect_cheaper) in [(1000u64, true), (bound - 1, true), (bound, false)] {
            let hw = HwConfig {
                setup_cycles_per_layer: setup,
                ..HwConfig::default()
            };
            let cycles = |text: &str| -> Result<u64, String> {
                let network = parse_network(text).map_err(|e| e.to_string())?;
                let geometries = netdesc::network_geometries(&network).map_err(|e| e.to_string())?;
                Ok(network_cycles(&geometries, &hw, CycleMode::PixelArray)
                    .map_err(|e| e.to_string())?
                    .total_cycles)
            };
            let with_dilated = cycles(&text_dilated)?;
            let with_cassod = cycles(&text_cassod)?;
            if expect_cheaper {
                check!(
                    with_cassod < with_dilated,
                    "setup {setup}: CASSOD {with_cassod} not below dilated {with_dilated}"
                );
            } else {
                check!(
                    with_cassod >= with_dilated,
                    "setup {setup}: CASSOD {with_cassod} unexpectedly below {with_dilated}"
                );
            }
        }
        Ok(())
    });
}

fn fig7_net(layer: &str) -> String {
    let mut text = String::from("network fig7 input 64x128x128\n");
    for _ in 0..10 {
        text.push_str(&format!("layer {layer} weights=zeros\n"));
    }
    text
}

#[test]
fn criterion_10_oracle_suite() {
    criterion(10, "oracle agreement (500 cases) + linearity + translation", || {
        // 500 seeded random cases, full and depthwise, against the oracle.
        let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
        for case in 0..500 {
            let d = [2usize, 4, 6][rng.gen_range(0..3)];
            let c_in = rng.gen_range(1..=3usize);
            let depthwise = rng.gen_bool(0.4);
            let c_out = if depthwise { c_in } else { rng.gen_range(1..=3usize) };
            let h = rng.gen_range(4..=16usize);
            let w = rng.gen_range(4..=16usize);
            let n = if depthwise { c_in * 4 } else { c_in * c_out * 4 };
            let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let kernels = if depthwise {
                KernelSet::depthwise(2, d, c_in, weights).unwrap()
            } else {
                KernelSet::full(2, d, c_in, c_out, weights).unwrap()
            };
            let input = Tensor::from_fn(c_in, h, w, |_, _, _| rng.gen_range(-1.0..=1.0)).unwrap();
            let fast =
                dilated_conv_2x2(&input, &kernels, Padding::SameZero).map_err(|e| e.to_string())?;
            let oracle =
                conv2d_ref(&input, &kernels, Padding::SameZero).map_err(|e| e.to_string())?;
            let rel = fast.max_rel_diff(&oracle, 0).unwrap();
            check!(
                rel <= 1e-12,
                "case {case} (D={d}, {c_in}->{c_out}, dw={depthwise}): rel diff {rel}"
            );
        }

        linearity_property().map_err(|e| format!("linearity: {e}"))?;
        translation_property().map_err(|e| format!("translation equivariance: {e}"))?;
        Ok(())
    });
}

fn conv_any(input: &Tensor, kernels: &KernelSet) -> Tensor {
    if kernels.base_size() == 2 {
        dilated_conv_2x2(input, kernels, Padding::SameZero).unwrap()
    } else {
        conv2d_ref(input, kernels, Padding::SameZero).unwrap()
    }
}

/// conv(a*x + b*y) == a*conv(x) + b*conv(y) within 1e-9 relative to the
/// operand scale, 200 cases.
fn linearity_property() -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (
        1..=2usize,                   // channels
        5..=10usize,                  // height
        5..=10usize,                  // width
        prop_oneof![Just((2usize, 2usize)), Just((2, 4)), Just((3, 1)), Just((3, 2))],
        -2.0..2.0f64,                 // a
        -2.0..2.0f64,                 // b
        any::<u64>(),                 // seed
    );
    runner
        .run(&strategy, |(c, h, w, (k, d), a, b, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let kernels = KernelSet::full(
                k,
                d,
                c,
                2,
                (0..2 * c * k * k).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
            )
            .unwrap();
            let x = Tensor::from_fn(c, h, w, |_, _, _| rng.gen_range(-1.0..=1.0)).unwrap();
            let y = Tensor::from_fn(c, h, w, |_, _, _| rng.gen_range(-1.0..=1.0)).unwrap();
            let mix = Tensor::from_fn(c, h, w, |ci, i, j| {
                a * x.get(ci, i, j) + b * y.get(ci, i, j)
            })
            .unwrap();

            let conv_mix = conv_any(&mix, &kernels);
            let conv_x = conv_any(&x, &kernels);
            let conv_y = conv_any(&y, &kernels);
            let max_x = conv_x.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let max_y = conv_y.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = (a.abs() * max_x + b.abs() * max_y).max(1.0);
            for (idx, out) in conv_mix.data().iter().enumerate() {
                let expected = a * conv_x.data()[idx] + b * conv_y.data()[idx];
                prop_assert!(
                    (out - expected).abs() <= 1e-9 * scale,
                    "element {idx}: {out} vs {expected} (scale {scale})"
                );
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Shifting the input shifts the output identically on the interior, 200
/// cases.
fn translation_property() -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (
        1..=2usize,
        9..=13usize,
        9..=13usize,
        prop_oneof![Just((2usize, 2usize)), Just((3usize, 1usize)), Just((3, 2))],
        -2i64..=2,
        -2i64..=2,
        any::<u64>(),
    );
    runner
        .run(&strategy, |(c, h, w, (k, d), s, t, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let kernels = KernelSet::full(
                k,
                d,
                c,
                1,
                (0..c * k * k).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
            )
            .unwrap();
            let x = Tensor::from_fn(c, h, w, |_, _, _| rng.gen_range(-1.0..=1.0)).unwrap();
            let shifted = Tensor::from_fn(c, h, w, |ci, i, j| {
                let (si, sj) = (i as i64 - s, j as i64 - t);
                x.get_padded(ci, si, sj)
            })
            .unwrap();

            let y = conv_any(&x, &kernels);
            let y_shifted = conv_any(&shifted, &kernels);
            let margin = max_tap_offset(k, d).unwrap() as i64 + s.abs().max(t.abs());
            for i in 0..h as i64 {
                for j in 0..w as i64 {
                    let interior = i >= margin
                        && j >= margin
                        && i < h as i64 - margin
                        && j < w as i64 - margin
                        && i - s >= margin
                        && j - t >= margin
                        && i - s < h as i64 - margin
                        && j - t < w as i64 - margin;
                    if interior {
                        let got = y_shifted.get(0, i as usize, j as usize);
                        let expected = y.get(0, (i - s) as usize, (j - t) as usize);
                        prop_assert!(
                            got == expected,
                            "({i},{j}) shift ({s},{t}): {got} != {expected}"
                        );
                    }
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}
