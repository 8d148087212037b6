//! Functional model of the dilated-convolution accelerator: the hierarchical
//! Pixel Array that routes input pixels for any dilation rate up to
//! `2^H - 1`, and analytic cycle / gate-count models.
//!
//! The Pixel Array has `H` hierarchical stages; stage `h` shifts a pixel
//! index by 0 or `2^h` per axis, so the reachable dilation rates are exactly
//! the binary decompositions `D = sum X_h * 2^h`.
//!
//! The cycle model is MAC-throughput based, not RTL-accurate: a layer costs
//! `ceil(taps_per_output * channel_product * out_pixels / macs_per_cycle)`
//! plus a fixed per-layer setup charge. In baseline mode (no Pixel Array) a
//! dilated filter is zero-padded to its full footprint and every padded tap
//! is processed; in pixel-array mode only the `k*k` real taps are.

use std::fmt;

use crate::error::{Error, Result};
use crate::tensor::{footprint_side, max_tap_offset, tap_offsets, Tensor};

/// Geometry of the hierarchical Pixel Array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelArrayConfig {
    /// Number of hierarchical stages `H`; stage `h` shifts by 0 or `2^h`.
    pub stages: usize,
    /// Pixel buffers per stage (rows).
    pub array_height: usize,
    /// Pixel buffers per stage (columns).
    pub array_width: usize,
}

impl Default for PixelArrayConfig {
    fn default() -> Self {
        // Three stages handle D in [1, 7]; a 7x7 extent covers the largest
        // supported filter footprint.
        PixelArrayConfig {
            stages: 3,
            array_height: 7,
            array_width: 7,
        }
    }
}

/// Largest dilation rate the stage hierarchy can compose: `2^H - 1`.
pub fn max_supported_dilation(stages: usize) -> usize {
    assert!(stages < usize::BITS as usize, "stage count out of range");
    (1usize << stages) - 1
}

/// Binary stage selection for a dilation rate: returns `[X_0, ..., X_{H-1}]`
/// with each `X_h` 0 or 1 and `sum X_h * 2^h == dilation`.
pub fn stage_selection(dilation: usize, stages: usize) -> Result<Vec<u8>> {
    let max = max_supported_dilation(stages);
    if dilation < 1 || dilation > max {
        return Err(Error::UnsupportedDilation {
            dilation,
            max_supported: max,
            reason: format!("a {stages}-stage pixel array supports D in [1, {max}]"),
        });
    }
    Ok((0..stages).map(|h| ((dilation >> h) & 1) as u8).collect())
}

/// Whole-system knobs: MAC throughput, per-layer setup, clock, the gate-count
/// calibration, and the attached pixel array.
#[derive(Debug, Clone, PartialEq)]
pub struct HwConfig {
    /// Parallel MAC lanes per cycle.
    pub macs_per_cycle: u64,
    /// Fixed cycles charged per layer (weight loads, configuration).
    pub setup_cycles_per_layer: u64,
    pub clock_hz: f64,
    /// Gates outside the pixel array.
    pub base_gates: f64,
    /// Gates per pixel-array stage.
    pub gates_per_stage: f64,
    /// Largest filter footprint the convolution processor accepts.
    pub max_filter_side: usize,
    pub pixel_array: PixelArrayConfig,
}

impl Default for HwConfig {
    fn default() -> Self {
        // 512 MACs/cycle at 400 MHz = 409.6 GOPS counting 2 ops per MAC.
        // Gate calibration: 1.9M base + 3 stages totalling 0.5M = 2.4M.
        HwConfig {
            macs_per_cycle: 512,
            setup_cycles_per_layer: 1000,
            clock_hz: 400.0e6,
            base_gates: 1.9e6,
            gates_per_stage: 0.5e6 / 3.0,
            max_filter_side: 7,
            pixel_array: PixelArrayConfig::default(),
        }
    }
}

impl HwConfig {
    /// Peak throughput in operations per second, counting 2 ops per MAC.
    pub fn peak_ops_per_second(&self) -> f64 {
        self.macs_per_cycle as f64 * 2.0 * self.clock_hz
    }
}

fn reachable_shift(base_size: usize, dilation: usize, stages: usize) -> Result<()> {
    let shift = max_tap_offset(base_size, dilation)?;
    let max = max_supported_dilation(stages);
    if shift > max {
        let max_d = if base_size > 1 {
            2 * max / (base_size - 1)
        } else {
            usize::MAX
        };
        return Err(Error::UnsupportedDilation {
            dilation,
            max_supported: max_d,
            reason: format!(
                "tap offset {shift} is not reachable with {stages} stages (max shift {max})"
            ),
        });
    }
    Ok(())
}

/// Checks that a `base_size`-tap filter with rate `dilation` is serviceable
/// by the pixel array plus convolution processor: the rate is in the Eq.-2
/// range, tap offsets are integral, the footprint fits the maximum filter
/// side, and every tap shift is stage-composable.
///
/// For the default H=3 / 7x7 configuration this reproduces the supported
/// sets `D in {2,4,6}` for 2x2 filters and `D in {1,2,3}` for 3x3 filters.
pub fn check_pixel_array_support(
    base_size: usize,
    dilation: usize,
    stages: usize,
    max_filter_side: usize,
) -> Result<()> {
    stage_selection(dilation, stages)?;
    tap_offsets(base_size, dilation)?;
    let side = footprint_side(base_size, dilation);
    if side > max_filter_side {
        let max_d = if base_size > 1 {
            (max_filter_side - 1) / (base_size - 1)
        } else {
            usize::MAX
        };
        return Err(Error::UnsupportedDilation {
            dilation,
            max_supported: max_d,
            reason: format!(
                "{base_size}x{base_size} filter at D={dilation} has footprint \
                 {side}x{side}, above the {max_filter_side}x{max_filter_side} limit"
            ),
        });
    }
    reachable_shift(base_size, dilation, stages)
}

/// Routes one pixel through the stage hierarchy: stage `H-1` first, down to
/// stage 0, shifting by `0` or `2^h` per axis according to the binary
/// decomposition of the requested offset.
fn routed_position(center: (i64, i64), offset: (i64, i64), stages: usize) -> (i64, i64) {
    let (mut i, mut j) = center;
    for h in (0..stages).rev() {
        let step = 1i64 << h;
        if (offset.0.unsigned_abs() >> h) & 1 == 1 {
            i += offset.0.signum() * step;
        }
        if (offset.1.unsigned_abs() >> h) & 1 == 1 {
            j += offset.1.signum() * step;
        }
    }
    (i, j)
}

/// Simulates the Pixel Array producing the `k×k` window of dilated taps
/// around `center` in one channel plane, row-major over tap indices.
///
/// Every tap is reached purely by composing per-stage shifts; the result is
/// identical to directly indexing `center + offset` with zero extension
/// outside the plane.
pub fn pixel_array_gather(
    config: &PixelArrayConfig,
    input: &Tensor,
    channel: usize,
    center: (usize, usize),
    base_size: usize,
    dilation: usize,
) -> Result<Vec<f64>> {
    if channel >= input.channels() {
        return Err(Error::shape(format!(
            "channel {channel} out of range for a {}-channel tensor",
            input.channels()
        )));
    }
    if center.0 >= input.height() || center.1 >= input.width() {
        return Err(Error::shape(format!(
            "center ({}, {}) out of range for a {}x{} plane",
            center.0,
            center.1,
            input.height(),
            input.width()
        )));
    }
    if base_size > config.array_height || base_size > config.array_width {
        return Err(Error::shape(format!(
            "a {base_size}x{base_size} window exceeds the {}x{} pixel array",
            config.array_height, config.array_width
        )));
    }
    stage_selection(dilation, config.stages)?;
    let offsets = tap_offsets(base_size, dilation)?;
    reachable_shift(base_size, dilation, config.stages)?;

    let c = (center.0 as i64, center.1 as i64);
    let mut window = Vec::with_capacity(base_size * base_size);
    for &ox in &offsets {
        for &oy in &offsets {
            let pos = routed_position(c, (ox, oy), config.stages);
            // The stage walk must land exactly on the tap; anything else is a
            // routing bug, not an input error.
            assert_eq!(pos, (c.0 + ox, c.1 + oy));
            window.push(input.get_padded(channel, pos.0, pos.1));
        }
    }
    Ok(window)
}

/// Whether the layer runs with or without the Pixel Array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleMode {
    /// Zero-pad the filter to its full footprint and process every tap.
    Baseline,
    /// Route taps through the Pixel Array; only real taps are processed.
    PixelArray,
}

impl fmt::Display for CycleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleMode::Baseline => "baseline",
            CycleMode::PixelArray => "pixel-array",
        })
    }
}

/// Shape of one convolution layer as the cycle model sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGeometry {
    /// Label carried into reports (e.g. `dilated-conv`).
    pub kind: String,
    pub base_size: usize,
    pub dilation: usize,
    pub c_in: usize,
    pub c_out: usize,
    pub out_h: usize,
    pub out_w: usize,
    pub depthwise: bool,
}

impl LayerGeometry {
    pub fn channel_product(&self) -> u64 {
        if self.depthwise {
            self.c_in as u64
        } else {
            self.c_in as u64 * self.c_out as u64
        }
    }

    pub fn out_pixels(&self) -> u64 {
        self.out_h as u64 * self.out_w as u64
    }
}

/// Simulated cost of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleEntry {
    pub layer_index: usize,
    pub kind: String,
    pub base_size: usize,
    pub dilation: usize,
    pub mode: CycleMode,
    /// Taps processed per output element (`k*k`, or the padded footprint in
    /// baseline mode).
    pub taps_per_output: u64,
    pub macs: u64,
    pub cycles: u64,
    /// True when the Pixel Array processes fewer taps than the zero-padded
    /// baseline would (i.e. the layer is genuinely dilated).
    pub benefits_from_pixel_array: bool,
}

impl CycleEntry {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.layer_index,
            self.kind,
            self.base_size,
            self.dilation,
            self.mode,
            self.taps_per_output,
            self.macs,
            self.cycles
        )
    }
}

/// Header of the cycle CSV schema.
pub const CSV_HEADER: &str = "layer_index,kind,k,D,mode,taps,macs,cycles";

/// Per-layer cycle entries plus totals and the derived frame rate.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleReport {
    pub mode: CycleMode,
    pub entries: Vec<CycleEntry>,
    pub total_macs: u64,
    pub total_cycles: u64,
    /// `clock_hz / total_cycles`.
    pub fps: f64,
}

impl CycleReport {
    pub fn csv_totals_row(&self) -> String {
        format!(
            "total,,,,{},,{},{}",
            self.mode, self.total_macs, self.total_cycles
        )
    }
}

/// Cycle cost of one layer.
///
/// `taps_per_output` is `k*k` with the Pixel Array and the zero-padded
/// footprint `((k-1)*D + 1)^2` without it, so pixel-array cycles do not vary
/// with the dilation rate.
pub fn layer_cycles(layer: &LayerGeometry, hw: &HwConfig, mode: CycleMode) -> Result<CycleEntry> {
    tap_offsets(layer.base_size, layer.dilation)?;
    if mode == CycleMode::PixelArray {
        check_pixel_array_support(
            layer.base_size,
            layer.dilation,
            hw.pixel_array.stages,
            hw.max_filter_side,
        )?;
    }
    let k = layer.base_size as u64;
    let padded_side = footprint_side(layer.base_size, layer.dilation) as u64;
    let taps = match mode {
        CycleMode::Baseline => padded_side * padded_side,
        CycleMode::PixelArray => k * k,
    };
    let macs = taps * layer.channel_product() * layer.out_pixels();
    let cycles = macs.div_ceil(hw.macs_per_cycle) + hw.setup_cycles_per_layer;
    Ok(CycleEntry {
        layer_index: 0,
        kind: layer.kind.clone(),
        base_size: layer.base_size,
        dilation: layer.dilation,
        mode,
        taps_per_output: taps,
        macs,
        cycles,
        benefits_from_pixel_array: padded_side * padded_side > k * k,
    })
}

/// Sums [`layer_cycles`] over a lowered network and derives the frame rate.
/// Layer errors are reported with their layer index.
pub fn network_cycles(
    layers: &[LayerGeometry],
    hw: &HwConfig,
    mode: CycleMode,
) -> Result<CycleReport> {
    if layers.is_empty() {
        return Err(Error::shape("network has no layers"));
    }
    let mut entries = Vec::with_capacity(layers.len());
    for (index, layer) in layers.iter().enumerate() {
        let mut entry = layer_cycles(layer, hw, mode).map_err(|e| Error::Semantic {
            index,
            message: e.to_string(),
        })?;
        entry.layer_index = index;
        entries.push(entry);
    }
    let total_macs = entries.iter().map(|e| e.macs).sum();
    let total_cycles = entries.iter().map(|e| e.cycles).sum::<u64>();
    let fps = hw.clock_hz / total_cycles as f64;
    Ok(CycleReport {
        mode,
        entries,
        total_macs,
        total_cycles,
        fps,
    })
}

/// Gate-count estimate: the pixel array grows linearly with its stage count
/// on top of a fixed base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateEstimate {
    pub pixel_array_gates: f64,
    pub total_gates: f64,
    pub pixel_array_share: f64,
}

pub fn gate_count(stages: usize, hw: &HwConfig) -> GateEstimate {
    let pixel_array_gates = stages as f64 * hw.gates_per_stage;
    let total_gates = hw.base_gates + pixel_array_gates;
    GateEstimate {
        pixel_array_gates,
        total_gates,
        pixel_array_share: pixel_array_gates / total_gates,
    }
}
