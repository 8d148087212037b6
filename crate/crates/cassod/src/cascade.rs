//! CASSOD modules: two cascaded 2×2 dilated convolution layers that stand in
//! for a single 3×3 dilated convolution with the same dilation rate.
//!
//! Variants differ in which layers are depthwise:
//!
//! * `A` — depthwise `C1`-channel first layer, full `C1 -> C2` second layer;
//! * `CFirst` — full `C1 -> C1` then full `C1 -> C2`;
//! * `CSecond` — full `C1 -> C2` then full `C2 -> C2`;
//! * `D` — both layers depthwise, channel count preserved.
//!
//! The module also owns the bookkeeping that motivates the cascade: filter
//! weight counts, MAC counts (stride 1, same-zero padding), receptive-field
//! composition, and the effective 3×3 kernel equal to the full discrete
//! convolution of the two 2×2 planes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{dilated_conv_2x2, KernelSet, Padding, Tensor};

/// Which layers of the cascade are depthwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CassodVariant {
    A,
    CFirst,
    CSecond,
    D,
}

impl CassodVariant {
    pub fn name(&self) -> &'static str {
        match self {
            CassodVariant::A => "cassod-a",
            CassodVariant::CFirst => "cassod-c-first",
            CassodVariant::CSecond => "cassod-c-second",
            CassodVariant::D => "cassod-d",
        }
    }
}

/// Per-channel folded batch normalization: `v * scale[c] + bias[c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAffine {
    pub scale: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Optional per-layer post-processing: affine first, then ReLU.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PostOps {
    pub affine: Option<ChannelAffine>,
    pub relu: bool,
}

impl PostOps {
    pub fn is_identity(&self) -> bool {
        self.affine.is_none() && !self.relu
    }

    pub fn apply(&self, t: &Tensor) -> Result<Tensor> {
        if self.is_identity() {
            return Ok(t.clone());
        }
        if let Some(affine) = &self.affine {
            if affine.scale.len() != t.channels() || affine.bias.len() != t.channels() {
                return Err(Error::shape(format!(
                    "affine expects {} scales and biases, tensor has {} channels",
                    affine.scale.len(),
                    t.channels()
                )));
            }
        }
        let (c, h, w) = t.shape();
        Tensor::from_fn(c, h, w, |ch, i, j| {
            let mut v = t.get(ch, i, j);
            if let Some(affine) = &self.affine {
                v = v * affine.scale[ch] + affine.bias[ch];
            }
            if self.relu {
                v = v.max(0.0);
            }
            v
        })
    }
}

/// How to fill layer weights at construction time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSource {
    Zeros,
    /// All weights 1.0.
    Unit,
    /// Deterministic uniform values in `[-1, 1]` from a ChaCha8 stream.
    Seeded(u64),
}

/// Post-op flags requested for one layer; the actual affine values come from
/// the weight source (identity for `Zeros`/`Unit`, drawn from the seeded
/// stream otherwise).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PostSpec {
    pub bn: bool,
    pub relu: bool,
}

/// Post-op flags for the two layers of a cascade.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CascadePostSpec {
    pub layer1: PostSpec,
    pub layer2: PostSpec,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed used for layer `index` of a module seeded with `module_seed`.
///
/// Lowering a CASSOD layer into two standalone layers keeps the forward pass
/// identical because the standalone layers are re-seeded with exactly these
/// values.
pub fn layer_seed(module_seed: u64, index: usize) -> u64 {
    splitmix64(module_seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Builds one convolution layer's kernels and post-ops from a weight source.
///
/// For `Seeded(s)` the weights are drawn first, then the affine scale and
/// bias vectors (when `post.bn` is set) from the same stream, so a layer is
/// fully determined by `(shape, seed, flags)`.
pub fn build_layer(
    base_size: usize,
    dilation: usize,
    c_in: usize,
    c_out: usize,
    depthwise: bool,
    source: WeightSource,
    post: PostSpec,
) -> Result<(KernelSet, PostOps)> {
    let planes = if depthwise { c_in } else { c_in * c_out };
    let n = planes * base_size * base_size;
    let mut rng = match source {
        WeightSource::Seeded(s) => Some(ChaCha8Rng::seed_from_u64(s)),
        _ => None,
    };
    let weights = match source {
        WeightSource::Zeros => vec![0.0; n],
        WeightSource::Unit => vec![1.0; n],
        WeightSource::Seeded(_) => {
            let rng = rng.as_mut().unwrap();
            (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
        }
    };
    let kernels = if depthwise {
        KernelSet::depthwise(base_size, dilation, c_in, weights)?
    } else {
        KernelSet::full(base_size, dilation, c_in, c_out, weights)?
    };

    let affine = if post.bn {
        Some(match rng.as_mut() {
            Some(rng) => {
                let scale = (0..c_out).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let bias = (0..c_out).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                ChannelAffine { scale, bias }
            }
            None => ChannelAffine {
                scale: vec![1.0; c_out],
                bias: vec![0.0; c_out],
            },
        })
    } else {
        None
    };
    Ok((
        kernels,
        PostOps {
            affine,
            relu: post.relu,
        },
    ))
}

/// A two-layer cascade of 2×2 dilated convolutions.
#[derive(Debug, Clone)]
pub struct CassodModule {
    variant: CassodVariant,
    c1: usize,
    c2: usize,
    dilation: usize,
    layer1: KernelSet,
    layer2: KernelSet,
    pub post1: PostOps,
    pub post2: PostOps,
}

/// Constructs a CASSOD module with the layer shapes implied by its variant.
/// The dilation rate must be even; variant `D` requires `c2 == c1`.
pub fn build_cassod(
    variant: CassodVariant,
    c1: usize,
    c2: usize,
    dilation: usize,
    post: CascadePostSpec,
    source: WeightSource,
) -> Result<CassodModule> {
    if variant == CassodVariant::D && c1 != c2 {
        return Err(Error::shape(format!(
            "cassod-d preserves the channel count (c1={c1}, c2={c2})"
        )));
    }
    let seeds = match source {
        WeightSource::Seeded(s) => [
            WeightSource::Seeded(layer_seed(s, 0)),
            WeightSource::Seeded(layer_seed(s, 1)),
        ],
        other => [other, other],
    };
    // (c_in, c_out, depthwise) per layer.
    let (l1, l2) = match variant {
        CassodVariant::A => ((c1, c1, true), (c1, c2, false)),
        CassodVariant::CFirst => ((c1, c1, false), (c1, c2, false)),
        CassodVariant::CSecond => ((c1, c2, false), (c2, c2, false)),
        CassodVariant::D => ((c1, c1, true), (c1, c1, true)),
    };
    let (layer1, post1) = build_layer(2, dilation, l1.0, l1.1, l1.2, seeds[0], post.layer1)?;
    let (layer2, post2) = build_layer(2, dilation, l2.0, l2.1, l2.2, seeds[1], post.layer2)?;
    Ok(CassodModule {
        variant,
        c1,
        c2,
        dilation,
        layer1,
        layer2,
        post1,
        post2,
    })
}

impl CassodModule {
    pub fn variant(&self) -> CassodVariant {
        self.variant
    }

    pub fn c1(&self) -> usize {
        self.c1
    }

    pub fn c2(&self) -> usize {
        self.c2
    }

    pub fn dilation(&self) -> usize {
        self.dilation
    }

    pub fn layer1(&self) -> &KernelSet {
        &self.layer1
    }

    pub fn layer2(&self) -> &KernelSet {
        &self.layer2
    }

    /// `layer2(post1(layer1(input)))` with `post2` applied last. Spatial dims
    /// are preserved (same-zero padding on both layers).
    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        if input.channels() != self.c1 {
            return Err(Error::shape(format!(
                "module expects {} input channels, got {}",
                self.c1,
                input.channels()
            )));
        }
        let mid = dilated_conv_2x2(input, &self.layer1, Padding::SameZero)?;
        let mid = self.post1.apply(&mid)?;
        let out = dilated_conv_2x2(&mid, &self.layer2, Padding::SameZero)?;
        self.post2.apply(&out)
    }

    /// Stored filter parameter count, both layers.
    pub fn weight_count(&self) -> u64 {
        (self.layer1.weight_count() + self.layer2.weight_count()) as u64
    }

    /// MAC count for a stride-1 forward pass producing `out_h × out_w` maps.
    pub fn mac_count(&self, out_h: usize, out_w: usize) -> u64 {
        mac_count(self.weight_count(), out_h, out_w)
    }

    /// For variant `D`: the depthwise 3×3 dilated kernel set equal to this
    /// cascade on interior pixels, one composed plane per channel.
    pub fn composed_effective_kernels(&self) -> Result<KernelSet> {
        if self.variant != CassodVariant::D {
            return Err(Error::shape(format!(
                "effective kernel composition is per-channel and needs a depthwise cascade, got {}",
                self.variant.name()
            )));
        }
        let mut weights = Vec::with_capacity(self.c1 * 9);
        for c in 0..self.c1 {
            let e = effective_kernel(
                &self.layer1.plane(c, c),
                &self.layer2.plane(c, c),
                self.dilation,
            )?;
            weights.extend_from_slice(&e);
        }
        KernelSet::depthwise(3, self.dilation, self.c1, weights)
    }
}

/// Full discrete convolution of two 2×2 kernel planes (row-major `(x, y)`),
/// giving the 3×3 plane `e` on the lattice `{-D, 0, +D}²` such that two
/// cascaded 2×2 D-dilated correlations equal one 3×3 D-dilated correlation
/// with kernel `e` on interior pixels.
pub fn effective_kernel(k1: &[f64], k2: &[f64], dilation: usize) -> Result<[f64; 9]> {
    if k1.len() != 4 || k2.len() != 4 {
        return Err(Error::shape(format!(
            "effective_kernel takes two 2x2 planes, got {} and {} values",
            k1.len(),
            k2.len()
        )));
    }
    if !dilation.is_multiple_of(2) {
        return Err(Error::InvalidDilation {
            dilation,
            reason: "D must be even for 2x2 filters".into(),
        });
    }
    let mut e = [0.0f64; 9];
    for x1 in 0..2 {
        for y1 in 0..2 {
            for x2 in 0..2 {
                for y2 in 0..2 {
                    e[(x1 + x2) * 3 + (y1 + y2)] += k1[x1 * 2 + y1] * k2[x2 * 2 + y2];
                }
            }
        }
    }
    Ok(e)
}

/// Filter weights of a plain convolution layer.
pub fn conv_weight_count(base_size: usize, c_in: usize, c_out: usize, depthwise: bool) -> u64 {
    let k2 = (base_size * base_size) as u64;
    if depthwise {
        k2 * c_in as u64
    } else {
        k2 * c_in as u64 * c_out as u64
    }
}

/// Filter weights of a CASSOD module as a closed formula:
/// `A: 4*C1*(1+C2)`, `C-first: 4*(C1+C2)*C1`, `C-second: 4*(C1+C2)*C2`,
/// `D: 4*(C1*2)`.
pub fn cassod_weight_count(variant: CassodVariant, c1: usize, c2: usize) -> u64 {
    let (c1, c2) = (c1 as u64, c2 as u64);
    match variant {
        CassodVariant::A => 4 * c1 * (1 + c2),
        CassodVariant::CFirst => 4 * (c1 + c2) * c1,
        CassodVariant::CSecond => 4 * (c1 + c2) * c2,
        CassodVariant::D => 4 * (c1 * 2),
    }
}

/// MACs of a stride-1 layer: one multiply-accumulate per stored weight per
/// output pixel.
pub fn mac_count(weights: u64, out_h: usize, out_w: usize) -> u64 {
    weights * out_h as u64 * out_w as u64
}

/// Receptive-field side length of a stride-1 stack of `(base_size, dilation)`
/// layers: `1 + sum (k-1)*D`.
pub fn receptive_field(layers: &[(usize, usize)]) -> usize {
    1 + layers.iter().map(|(k, d)| (k - 1) * d).sum::<usize>()
}
