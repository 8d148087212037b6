//! Dense C×H×W tensors, dilated convolution kernels, and the two convolution
//! routes: a brute-force reference (`conv2d_ref`) that serves as the oracle
//! for every equivalence test, and the specialized 2×2 dilated path
//! (`dilated_conv_2x2`).
//!
//! Conventions used throughout the crate:
//!
//! * data is channel-major: index `(c, i, j)` maps to `c*H*W + i*W + j`;
//! * convolutions are cross-correlations (no kernel flip);
//! * a `k×k` kernel with dilation `D` reads taps at offsets
//!   `(2x - (k-1)) * D / 2` for `x in 0..k`, so the footprint side is
//!   `(k-1)*D + 1`;
//! * even base sizes require an even dilation rate so that tap offsets stay
//!   integral.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read as _, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest base filter size the toolkit accepts.
pub const MAX_BASE_SIZE: usize = 7;

/// A dense stack of `channels` feature maps of size `height × width`.
///
/// Values are finite `f64`; construction and every operation that produces a
/// `Tensor` re-validate finiteness.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::shape(format!(
                "tensor dims must be positive, got {channels}x{height}x{width}"
            )));
        }
        let expected = channels * height * width;
        if data.len() != expected {
            return Err(Error::shape(format!(
                "tensor {channels}x{height}x{width} needs {expected} values, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "tensor value at flat index {pos} is {}",
                data[pos]
            )));
        }
        Ok(Tensor {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        assert!(channels > 0 && height > 0 && width > 0);
        Tensor {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for i in 0..height {
                for j in 0..width {
                    data.push(f(c, i, j));
                }
            }
        }
        Tensor::new(channels, height, width, data)
    }

    /// All zeros except a single 1.0 at `(c, i, j)`.
    pub fn unit_impulse(
        channels: usize,
        height: usize,
        width: usize,
        at: (usize, usize, usize),
    ) -> Self {
        let mut t = Tensor::zeros(channels, height, width);
        let idx = t.flat_index(at.0, at.1, at.2);
        t.data[idx] = 1.0;
        t
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn flat_index(&self, c: usize, i: usize, j: usize) -> usize {
        assert!(c < self.channels && i < self.height && j < self.width);
        (c * self.height + i) * self.width + j
    }

    pub fn get(&self, c: usize, i: usize, j: usize) -> f64 {
        self.data[self.flat_index(c, i, j)]
    }

    /// Zero-extended read: out-of-range coordinates read as 0.0 (the
    /// same-zero border convention).
    pub fn get_padded(&self, c: usize, i: i64, j: i64) -> f64 {
        if i < 0 || j < 0 || i >= self.height as i64 || j >= self.width as i64 {
            0.0
        } else {
            self.data[(c * self.height + i as usize) * self.width + j as usize]
        }
    }

    /// Largest absolute element-wise difference, ignoring pixels closer than
    /// `margin` to any spatial border.
    pub fn max_abs_diff(&self, other: &Tensor, margin: usize) -> Result<f64> {
        self.check_same_shape(other)?;
        let mut max = 0.0f64;
        for c in 0..self.channels {
            for i in margin..self.height.saturating_sub(margin) {
                for j in margin..self.width.saturating_sub(margin) {
                    let d = (self.get(c, i, j) - other.get(c, i, j)).abs();
                    max = max.max(d);
                }
            }
        }
        Ok(max)
    }

    /// Largest relative element-wise difference over the same region as
    /// [`Tensor::max_abs_diff`]; the denominator is `max(|a|, |b|, 1e-300)`.
    pub fn max_rel_diff(&self, other: &Tensor, margin: usize) -> Result<f64> {
        self.check_same_shape(other)?;
        let mut max = 0.0f64;
        for c in 0..self.channels {
            for i in margin..self.height.saturating_sub(margin) {
                for j in margin..self.width.saturating_sub(margin) {
                    let a = self.get(c, i, j);
                    let b = other.get(c, i, j);
                    let denom = a.abs().max(b.abs()).max(1e-300);
                    max = max.max((a - b).abs() / denom);
                }
            }
        }
        Ok(max)
    }

    fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(format!(
                "tensor shapes differ: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    /// Writes the `tensor v1` text format: a header line
    /// `tensor v1 <C> <H> <W>` followed by the values in `(c, i, j)` order,
    /// one row per line, with 17 significant digits (lossless for f64).
    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            w,
            "tensor v1 {} {} {}",
            self.channels, self.height, self.width
        )?;
        let mut line = String::new();
        for c in 0..self.channels {
            for i in 0..self.height {
                line.clear();
                for j in 0..self.width {
                    if j > 0 {
                        line.push(' ');
                    }
                    write!(line, "{:.16e}", self.get(c, i, j)).unwrap();
                }
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(&mut f).map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Parses the `tensor v1` text format. The value count must match the
    /// header exactly and every value must be finite.
    pub fn read_from(r: impl std::io::Read, origin: &Path) -> Result<Self> {
        let fmt = |message: String| Error::TensorFormat {
            path: origin.to_path_buf(),
            message,
        };
        let mut reader = BufReader::new(r);
        let mut header = String::new();
        reader
            .read_line(&mut header)
            .map_err(|e| Error::io(origin, e))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "tensor" || fields[1] != "v1" {
            return Err(fmt(format!(
                "expected header `tensor v1 <C> <H> <W>`, got `{}`",
                header.trim_end()
            )));
        }
        let dim = |s: &str, name: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| fmt(format!("bad {name} `{s}` in header")))
        };
        let channels = dim(fields[2], "channel count")?;
        let height = dim(fields[3], "height")?;
        let width = dim(fields[4], "width")?;
        let expected = channels
            .checked_mul(height)
            .and_then(|n| n.checked_mul(width))
            .ok_or_else(|| fmt("tensor dims overflow".to_string()))?;

        let mut data = Vec::with_capacity(expected);
        let mut body = String::new();
        reader
            .read_to_string(&mut body)
            .map_err(|e| Error::io(origin, e))?;
        for token in body.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|_| fmt(format!("bad value `{token}`")))?;
            data.push(v);
        }
        if data.len() != expected {
            return Err(fmt(format!(
                "expected {expected} values, found {}",
                data.len()
            )));
        }
        Tensor::new(channels, height, width, data)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Tensor::read_from(f, path)
    }
}

/// Border handling for convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// Zero-extend so that the output spatial size equals the input size.
    /// The implied pad per side is the kernel's maximum absolute tap offset.
    SameZero,
    /// No padding: the output shrinks by `(k-1)*D` per spatial axis.
    Valid,
}

/// One-dimensional tap offsets of a `base_size`-tap dilated kernel.
///
/// `base_size == 2` yields `{-D/2, +D/2}` and odd sizes yield `k` offsets
/// spaced `D` apart around zero. The 2-D footprint is the Cartesian square of
/// the returned list.
pub fn tap_offsets(base_size: usize, dilation: usize) -> Result<Vec<i64>> {
    check_filter_geometry(base_size, dilation)?;
    Ok((0..base_size)
        .map(|x| (2 * x as i64 - (base_size as i64 - 1)) * dilation as i64 / 2)
        .collect())
}

/// Largest absolute tap offset: `(k-1)*D/2`. Also the implied same-zero pad
/// per side.
pub fn max_tap_offset(base_size: usize, dilation: usize) -> Result<usize> {
    check_filter_geometry(base_size, dilation)?;
    Ok((base_size - 1) * dilation / 2)
}

/// Side length of the dilated footprint: `(k-1)*D + 1`.
pub fn footprint_side(base_size: usize, dilation: usize) -> usize {
    (base_size - 1) * dilation + 1
}

fn check_filter_geometry(base_size: usize, dilation: usize) -> Result<()> {
    if !(1..=MAX_BASE_SIZE).contains(&base_size) {
        return Err(Error::UnsupportedFilter { base_size });
    }
    if dilation < 1 {
        return Err(Error::InvalidDilation {
            dilation,
            reason: "dilation rate must be at least 1".into(),
        });
    }
    if base_size.is_multiple_of(2) && !dilation.is_multiple_of(2) {
        return Err(Error::InvalidDilation {
            dilation,
            reason: format!("D must be even for {base_size}x{base_size} filters"),
        });
    }
    Ok(())
}

/// A set of convolution weights with declared base size and dilation rate.
///
/// Full kernels store `out × in × k × k` weights indexed `(o, c, x, y)`;
/// depthwise kernels store one `k × k` plane per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSet {
    base_size: usize,
    dilation: usize,
    in_channels: usize,
    out_channels: usize,
    depthwise: bool,
    weights: Vec<f64>,
}

impl KernelSet {
    pub fn full(
        base_size: usize,
        dilation: usize,
        in_channels: usize,
        out_channels: usize,
        weights: Vec<f64>,
    ) -> Result<Self> {
        Self::build(base_size, dilation, in_channels, out_channels, false, weights)
    }

    pub fn depthwise(
        base_size: usize,
        dilation: usize,
        channels: usize,
        weights: Vec<f64>,
    ) -> Result<Self> {
        Self::build(base_size, dilation, channels, channels, true, weights)
    }

    fn build(
        base_size: usize,
        dilation: usize,
        in_channels: usize,
        out_channels: usize,
        depthwise: bool,
        weights: Vec<f64>,
    ) -> Result<Self> {
        check_filter_geometry(base_size, dilation)?;
        if in_channels == 0 || out_channels == 0 {
            return Err(Error::shape("kernel channel counts must be positive"));
        }
        if depthwise && in_channels != out_channels {
            return Err(Error::shape(format!(
                "depthwise kernels preserve the channel count ({in_channels} != {out_channels})"
            )));
        }
        let planes = if depthwise {
            in_channels
        } else {
            out_channels * in_channels
        };
        let expected = planes * base_size * base_size;
        if weights.len() != expected {
            return Err(Error::shape(format!(
                "kernel set needs {expected} weights, got {}",
                weights.len()
            )));
        }
        if let Some(pos) = weights.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "kernel weight at flat index {pos} is {}",
                weights[pos]
            )));
        }
        Ok(KernelSet {
            base_size,
            dilation,
            in_channels,
            out_channels,
            depthwise,
            weights,
        })
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    pub fn dilation(&self) -> usize {
        self.dilation
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn is_depthwise(&self) -> bool {
        self.depthwise
    }

    /// Number of stored filter parameters.
    pub fn weight_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight `W(o, c, x, y)` of a full kernel set.
    pub fn weight(&self, out: usize, cin: usize, x: usize, y: usize) -> f64 {
        debug_assert!(!self.depthwise);
        let k = self.base_size;
        self.weights[((out * self.in_channels + cin) * k + x) * k + y]
    }

    /// Weight `W(c, x, y)` of a depthwise kernel set.
    pub fn weight_dw(&self, channel: usize, x: usize, y: usize) -> f64 {
        debug_assert!(self.depthwise);
        let k = self.base_size;
        self.weights[(channel * k + x) * k + y]
    }

    /// The `k × k` plane for `(out, cin)` (or `(c, c)` when depthwise) as a
    /// row-major vector.
    pub fn plane(&self, out: usize, cin: usize) -> Vec<f64> {
        let k = self.base_size;
        let mut p = Vec::with_capacity(k * k);
        for x in 0..k {
            for y in 0..k {
                p.push(if self.depthwise {
                    assert_eq!(out, cin);
                    self.weight_dw(cin, x, y)
                } else {
                    self.weight(out, cin, x, y)
                });
            }
        }
        p
    }
}

fn output_dims(input: &Tensor, kernels: &KernelSet, padding: Padding) -> Result<(usize, usize)> {
    match padding {
        Padding::SameZero => Ok((input.height(), input.width())),
        Padding::Valid => {
            let span = (kernels.base_size() - 1) * kernels.dilation();
            if input.height() <= span || input.width() <= span {
                return Err(Error::shape(format!(
                    "valid convolution: footprint side {} exceeds input {}x{}",
                    span + 1,
                    input.height(),
                    input.width()
                )));
            }
            Ok((input.height() - span, input.width() - span))
        }
    }
}

fn check_in_channels(input: &Tensor, kernels: &KernelSet) -> Result<()> {
    if input.channels() != kernels.in_channels() {
        return Err(Error::shape(format!(
            "input has {} channels but kernels expect {}",
            input.channels(),
            kernels.in_channels()
        )));
    }
    Ok(())
}

/// Brute-force reference convolution (cross-correlation orientation).
///
/// This is the oracle every other convolution path is checked against, so it
/// stays a plain nested loop over `tap_offsets`. The summation order per
/// output element is fixed: input channel, then tap row, then tap column.
pub fn conv2d_ref(input: &Tensor, kernels: &KernelSet, padding: Padding) -> Result<Tensor> {
    check_in_channels(input, kernels)?;
    let offsets = tap_offsets(kernels.base_size(), kernels.dilation())?;
    let (out_h, out_w) = output_dims(input, kernels, padding)?;
    let base = match padding {
        Padding::SameZero => 0i64,
        Padding::Valid => max_tap_offset(kernels.base_size(), kernels.dilation())? as i64,
    };
    let out_c = kernels.out_channels();

    let mut data = Vec::with_capacity(out_c * out_h * out_w);
    for o in 0..out_c {
        for i in 0..out_h {
            for j in 0..out_w {
                let ci = base + i as i64;
                let cj = base + j as i64;
                let mut acc = 0.0f64;
                if kernels.is_depthwise() {
                    for (x, ox) in offsets.iter().enumerate() {
                        for (y, oy) in offsets.iter().enumerate() {
                            acc += input.get_padded(o, ci + ox, cj + oy)
                                * kernels.weight_dw(o, x, y);
                        }
                    }
                } else {
                    for c in 0..kernels.in_channels() {
                        for (x, ox) in offsets.iter().enumerate() {
                            for (y, oy) in offsets.iter().enumerate() {
                                acc += input.get_padded(c, ci + ox, cj + oy)
                                    * kernels.weight(o, c, x, y);
                            }
                        }
                    }
                }
                data.push(acc);
            }
        }
    }
    Tensor::new(out_c, out_h, out_w, data)
}

/// 2×2 dilated convolution:
/// `O(i,j) = sum_c sum_{x,y in {0,1}} I(c, i - D/2 + x*D, j - D/2 + y*D) * W(c,x,y)`,
/// extended over output channels. Requires an even dilation rate so that
/// `D/2` is integral.
///
/// Output channels are computed in parallel; each output element keeps a
/// fixed summation order, so results do not depend on the thread count and
/// match [`conv2d_ref`] bitwise.
pub fn dilated_conv_2x2(input: &Tensor, kernels: &KernelSet, padding: Padding) -> Result<Tensor> {
    if kernels.base_size() != 2 {
        return Err(Error::shape(format!(
            "dilated_conv_2x2 requires base size 2, got {}",
            kernels.base_size()
        )));
    }
    check_in_channels(input, kernels)?;
    let (out_h, out_w) = output_dims(input, kernels, padding)?;
    let d = kernels.dilation() as i64;
    let half = d / 2;
    let base = match padding {
        Padding::SameZero => 0i64,
        Padding::Valid => half,
    };
    let out_c = kernels.out_channels();
    let plane = out_h * out_w;

    let mut data = vec![0.0f64; out_c * plane];
    data.par_chunks_mut(plane).enumerate().for_each(|(o, out)| {
        for i in 0..out_h {
            for j in 0..out_w {
                let ci = base + i as i64;
                let cj = base + j as i64;
                let mut acc = 0.0f64;
                if kernels.is_depthwise() {
                    for x in 0..2i64 {
                        for y in 0..2i64 {
                            acc += input.get_padded(o, ci - half + x * d, cj - half + y * d)
                                * kernels.weight_dw(o, x as usize, y as usize);
                        }
                    }
                } else {
                    for c in 0..kernels.in_channels() {
                        for x in 0..2i64 {
                            for y in 0..2i64 {
                                acc += input.get_padded(c, ci - half + x * d, cj - half + y * d)
                                    * kernels.weight(o, c, x as usize, y as usize);
                            }
                        }
                    }
                }
                out[i * out_w + j] = acc;
            }
        }
    });
    Tensor::new(out_c, out_h, out_w, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(rng: &mut ChaCha8Rng, c: usize, h: usize, w: usize) -> Tensor {
        Tensor::from_fn(c, h, w, |_, _, _| rng.gen_range(-1.0..=1.0)).unwrap()
    }

    fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
    }

    #[test]
    fn tap_offsets_examples() {
        assert_eq!(tap_offsets(2, 2).unwrap(), vec![-1, 1]);
        assert_eq!(tap_offsets(3, 1).unwrap(), vec![-1, 0, 1]);
        assert_eq!(tap_offsets(2, 4).unwrap(), vec![-2, 2]);
        assert_eq!(tap_offsets(3, 2).unwrap(), vec![-2, 0, 2]);
        assert_eq!(tap_offsets(5, 2).unwrap(), vec![-4, -2, 0, 2, 4]);
    }

    #[test]
    fn tap_offsets_rejects_odd_dilation_for_even_sizes() {
        let err = tap_offsets(2, 3).unwrap_err();
        assert!(matches!(err, Error::InvalidDilation { dilation: 3, .. }));
        assert!(err.to_string().contains("D must be even"));
        assert!(tap_offsets(4, 5).is_err());
        assert!(tap_offsets(4, 2).is_ok());
    }

    #[test]
    fn tap_offsets_rejects_unsupported_sizes() {
        assert!(matches!(
            tap_offsets(0, 1),
            Err(Error::UnsupportedFilter { base_size: 0 })
        ));
        assert!(matches!(
            tap_offsets(8, 1),
            Err(Error::UnsupportedFilter { base_size: 8 })
        ));
        assert!(tap_offsets(7, 1).is_ok());
    }

    #[test]
    fn conv_ref_impulse_places_flipped_kernel_on_dilated_lattice() {
        // Impulse response of a cross-correlation: weight W(x,y) appears at
        // offset (-off[x], -off[y]) from the impulse.
        let input = Tensor::unit_impulse(1, 9, 9, (0, 4, 4));
        let w: Vec<f64> = (1..=9).map(f64::from).collect();
        let kernels = KernelSet::full(3, 2, 1, 1, w.clone()).unwrap();
        let out = conv2d_ref(&input, &kernels, Padding::SameZero).unwrap();
        for x in 0..3usize {
            for y in 0..3usize {
                let off = |t: usize| (t as i64 - 1) * 2;
                let v = out.get(0, (4 - off(x)) as usize, (4 - off(y)) as usize);
                assert_eq!(v, w[x * 3 + y]);
            }
        }
        // Everything off the dilated lattice is zero.
        let nonzero = out.data().iter().filter(|v| **v != 0.0).count();
        assert_eq!(nonzero, 9);
    }

    #[test]
    fn conv_ref_constant_input_center() {
        let v = 0.37;
        let c = 3;
        let input = Tensor::from_fn(c, 7, 7, |_, _, _| v).unwrap();
        let kernels = KernelSet::full(3, 1, c, 1, vec![1.0; c * 9]).unwrap();
        let out = conv2d_ref(&input, &kernels, Padding::SameZero).unwrap();
        let center = out.get(0, 3, 3);
        assert!((center - 9.0 * c as f64 * v).abs() < 1e-12);
    }

    // Second, independently coded summation used to cross-check conv2d_ref
    // itself: materializes the zero-padded input, then loops over absolute
    // positions instead of offsets.
    fn naive_padded_conv(input: &Tensor, kernels: &KernelSet) -> Tensor {
        let k = kernels.base_size();
        let d = kernels.dilation();
        let pad = (k - 1) * d / 2;
        let (c_in, h, w) = input.shape();
        let ph = h + 2 * pad;
        let pw = w + 2 * pad;
        let mut padded = vec![0.0; c_in * ph * pw];
        for c in 0..c_in {
            for i in 0..h {
                for j in 0..w {
                    padded[(c * ph + i + pad) * pw + j + pad] = input.get(c, i, j);
                }
            }
        }
        let mut data = vec![0.0; kernels.out_channels() * h * w];
        for o in 0..kernels.out_channels() {
            for i in 0..h {
                for j in 0..w {
                    let mut acc = 0.0;
                    for c in 0..c_in {
                        for x in 0..k {
                            for y in 0..k {
                                acc += padded[(c * ph + i + x * d) * pw + j + y * d]
                                    * kernels.weight(o, c, x, y);
                            }
                        }
                    }
                    data[(o * h + i) * w + j] = acc;
                }
            }
        }
        Tensor::new(kernels.out_channels(), h, w, data).unwrap()
    }

    #[test]
    fn conv_ref_matches_independent_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let input = random_tensor(&mut rng, 1, 8, 8);
        let w = random_weights(&mut rng, 9);
        let kernels = KernelSet::full(3, 2, 1, 1, w).unwrap();
        let got = conv2d_ref(&input, &kernels, Padding::SameZero).unwrap();
        let expected = naive_padded_conv(&input, &kernels);
        assert_eq!(got.max_abs_diff(&expected, 0).unwrap(), 0.0);
    }

    #[test]
    fn conv_ref_valid_mode_shrinks_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let input = random_tensor(&mut rng, 1, 10, 10);
        let w = random_weights(&mut rng, 9);
        let kernels = KernelSet::full(3, 2, 1, 1, w).unwrap();
        let full = conv2d_ref(&input, &kernels, Padding::SameZero).unwrap();
        let valid = conv2d_ref(&input, &kernels, Padding::Valid).unwrap();
        assert_eq!(valid.shape(), (1, 6, 6));
        // Valid output equals the same-zero interior.
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(valid.get(0, i, j), full.get(0, i + 2, j + 2));
            }
        }
    }

    #[test]
    fn conv_ref_shape_errors() {
        let input = Tensor::zeros(2, 4, 4);
        let kernels = KernelSet::full(3, 1, 1, 1, vec![0.0; 9]).unwrap();
        assert!(matches!(
            conv2d_ref(&input, &kernels, Padding::SameZero),
            Err(Error::Shape(_))
        ));
        let input = Tensor::zeros(1, 4, 4);
        let kernels = KernelSet::full(3, 2, 1, 1, vec![0.0; 9]).unwrap();
        assert!(matches!(
            conv2d_ref(&input, &kernels, Padding::Valid),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn dilated_2x2_impulse_response() {
        let input = Tensor::unit_impulse(1, 8, 8, (0, 4, 4));
        let (a, b, c, d) = (1.0, 2.0, 3.0, 4.0);
        let kernels = KernelSet::full(2, 2, 1, 1, vec![a, b, c, d]).unwrap();
        let out = dilated_conv_2x2(&input, &kernels, Padding::SameZero).unwrap();
        // Cross-correlation flip: W(x,y) lands at offset (D/2 - x*D, D/2 - y*D).
        assert_eq!(out.get(0, 5, 5), a);
        assert_eq!(out.get(0, 5, 3), b);
        assert_eq!(out.get(0, 3, 5), c);
        assert_eq!(out.get(0, 3, 3), d);
        let nonzero = out.data().iter().filter(|v| **v != 0.0).count();
        assert_eq!(nonzero, 4);
    }

    #[test]
    fn dilated_2x2_constant_input() {
        let v = -0.21;
        let c = 5;
        let input = Tensor::from_fn(c, 8, 8, |_, _, _| v).unwrap();
        let kernels = KernelSet::full(2, 2, c, 1, vec![1.0; c * 4]).unwrap();
        let out = dilated_conv_2x2(&input, &kernels, Padding::SameZero).unwrap();
        let center = out.get(0, 4, 4);
        assert!((center - 4.0 * c as f64 * v).abs() < 1e-12);
    }

    #[test]
    fn dilated_2x2_matches_reference_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let input = random_tensor(&mut rng, 2, 16, 16);
        let w = random_weights(&mut rng, 3 * 2 * 4);
        let kernels = KernelSet::full(2, 4, 2, 3, w).unwrap();
        for padding in [Padding::SameZero, Padding::Valid] {
            let fast = dilated_conv_2x2(&input, &kernels, padding).unwrap();
            let oracle = conv2d_ref(&input, &kernels, padding).unwrap();
            assert_eq!(fast.max_abs_diff(&oracle, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn dilated_2x2_depthwise_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let input = random_tensor(&mut rng, 3, 12, 12);
        let w = random_weights(&mut rng, 3 * 4);
        let kernels = KernelSet::depthwise(2, 2, 3, w).unwrap();
        for padding in [Padding::SameZero, Padding::Valid] {
            let fast = dilated_conv_2x2(&input, &kernels, padding).unwrap();
            let oracle = conv2d_ref(&input, &kernels, padding).unwrap();
            assert_eq!(fast.max_abs_diff(&oracle, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn dilated_2x2_rejects_other_base_sizes() {
        let input = Tensor::zeros(1, 4, 4);
        let kernels = KernelSet::full(3, 1, 1, 1, vec![0.0; 9]).unwrap();
        assert!(dilated_conv_2x2(&input, &kernels, Padding::SameZero).is_err());
    }

    #[test]
    fn kernel_set_rejects_odd_dilation_for_2x2() {
        assert!(matches!(
            KernelSet::full(2, 3, 1, 1, vec![0.0; 4]),
            Err(Error::InvalidDilation { dilation: 3, .. })
        ));
    }

    #[test]
    fn depthwise_equals_full_with_diagonal_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let channels = 3;
        let input = random_tensor(&mut rng, channels, 10, 10);
        let dw_weights = random_weights(&mut rng, channels * 4);
        let dw = KernelSet::depthwise(2, 2, channels, dw_weights.clone()).unwrap();

        let mut full_weights = vec![0.0; channels * channels * 4];
        for c in 0..channels {
            for t in 0..4 {
                full_weights[(c * channels + c) * 4 + t] = dw_weights[c * 4 + t];
            }
        }
        let full = KernelSet::full(2, 2, channels, channels, full_weights).unwrap();

        let a = conv2d_ref(&input, &dw, Padding::SameZero).unwrap();
        let b = conv2d_ref(&input, &full, Padding::SameZero).unwrap();
        assert!(a.max_abs_diff(&b, 0).unwrap() < 1e-15);
    }

    #[test]
    fn tensor_file_round_trip_is_lossless() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let t = random_tensor(&mut rng, 2, 3, 4);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("tensor v1 2 3 4\n"));
        let back = Tensor::read_from(&buf[..], Path::new("<mem>")).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn tensor_read_rejects_malformed_input() {
        let read = |s: &str| Tensor::read_from(s.as_bytes(), Path::new("<mem>"));
        assert!(read("tensor v2 1 1 1\n0").is_err());
        assert!(read("tensor v1 1 1 2\n0.0").is_err());
        assert!(read("tensor v1 1 1 1\n0 0").is_err());
        assert!(read("tensor v1 1 1 1\nnan").is_err());
        assert!(read("tensor v1 1 1 1\nabc").is_err());
        assert!(read("tensor v1 0 1 1\n").is_err());
        assert!(read("tensor v1 1 1 1\n0.5").is_ok());
    }

    #[test]
    fn tensor_rejects_non_finite_values() {
        assert!(matches!(
            Tensor::new(1, 1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            KernelSet::full(2, 2, 1, 1, vec![0.0, f64::INFINITY, 0.0, 0.0]),
            Err(Error::NonFinite(_))
        ));
    }
}
