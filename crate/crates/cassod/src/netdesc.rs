//! The `.cassod-net` text format: a line-oriented description of sequential
//! convolution stacks, plus lowering of CASSOD layers into their explicit
//! two-layer cascades, execution, and per-layer cost analysis.
//!
//! Grammar (one statement per line, `#` starts a comment):
//!
//! ```text
//! network <name> input <C>x<H>x<W>
//! layer <kind> k=<K> d=<D> in=<C1> out=<C2> [bn] [relu] [weights=<spec>]
//! ```
//!
//! Layer kinds: `conv`, `dilated-conv`, `depthwise-conv`, `cassod-a`,
//! `cassod-c-first`, `cassod-c-second`, `cassod-d`. Weight specs: `zeros`
//! (default), `unit`, `seed:<u64>`, `file:<path>` (a `tensor v1` file with
//! one `k×k` channel plane per `(out, in)` pair, or per channel when
//! depthwise). `d` defaults to 1. Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::cascade::{
    self, build_cassod, build_layer, cassod_weight_count, conv_weight_count, layer_seed,
    receptive_field, CascadePostSpec, CassodVariant, PostSpec,
};
use crate::error::{Error, Result};
use crate::hwsim::{self, CycleMode, HwConfig, LayerGeometry};
use crate::tensor::{
    conv2d_ref, dilated_conv_2x2, tap_offsets, KernelSet, Padding, Tensor, MAX_BASE_SIZE,
};

/// Layer kinds accepted by the network format, one per supported structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    /// Standard convolution (dilation rate fixed at 1).
    Conv,
    DilatedConv,
    DepthwiseConv,
    CassodA,
    CassodCFirst,
    CassodCSecond,
    CassodD,
}

impl LayerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LayerKind::Conv => "conv",
            LayerKind::DilatedConv => "dilated-conv",
            LayerKind::DepthwiseConv => "depthwise-conv",
            LayerKind::CassodA => "cassod-a",
            LayerKind::CassodCFirst => "cassod-c-first",
            LayerKind::CassodCSecond => "cassod-c-second",
            LayerKind::CassodD => "cassod-d",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "conv" => LayerKind::Conv,
            "dilated-conv" => LayerKind::DilatedConv,
            "depthwise-conv" => LayerKind::DepthwiseConv,
            "cassod-a" => LayerKind::CassodA,
            "cassod-c-first" => LayerKind::CassodCFirst,
            "cassod-c-second" => LayerKind::CassodCSecond,
            "cassod-d" => LayerKind::CassodD,
            _ => return None,
        })
    }

    pub fn cassod_variant(&self) -> Option<CassodVariant> {
        Some(match self {
            LayerKind::CassodA => CassodVariant::A,
            LayerKind::CassodCFirst => CassodVariant::CFirst,
            LayerKind::CassodCSecond => CassodVariant::CSecond,
            LayerKind::CassodD => CassodVariant::D,
            _ => return None,
        })
    }

    pub fn is_cassod(&self) -> bool {
        self.cassod_variant().is_some()
    }

    pub fn is_depthwise(&self) -> bool {
        matches!(self, LayerKind::DepthwiseConv)
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a layer's weights come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightSpec {
    Zeros,
    Unit,
    Seed(u64),
    File(PathBuf),
}

impl WeightSpec {
    fn parse(s: &str) -> Option<Self> {
        if let Some(rest) = s.strip_prefix("seed:") {
            return rest.parse::<u64>().ok().map(WeightSpec::Seed);
        }
        if let Some(rest) = s.strip_prefix("file:") {
            if rest.is_empty() {
                return None;
            }
            return Some(WeightSpec::File(PathBuf::from(rest)));
        }
        match s {
            "zeros" => Some(WeightSpec::Zeros),
            "unit" => Some(WeightSpec::Unit),
            _ => None,
        }
    }

    fn as_source(&self) -> Result<cascade::WeightSource> {
        Ok(match self {
            WeightSpec::Zeros => cascade::WeightSource::Zeros,
            WeightSpec::Unit => cascade::WeightSource::Unit,
            WeightSpec::Seed(s) => cascade::WeightSource::Seeded(*s),
            WeightSpec::File(p) => {
                return Err(Error::shape(format!(
                    "file weights ({}) cannot seed a cassod module",
                    p.display()
                )))
            }
        })
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Zeros => f.write_str("zeros"),
            WeightSpec::Unit => f.write_str("unit"),
            WeightSpec::Seed(s) => write!(f, "seed:{s}"),
            WeightSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// One line of the network body.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerDescriptor {
    pub kind: LayerKind,
    pub base_size: usize,
    pub dilation: usize,
    pub c_in: usize,
    pub c_out: usize,
    pub bn: bool,
    pub relu: bool,
    pub weights: WeightSpec,
}

impl LayerDescriptor {
    /// Filter weights stored by this layer (both cascade layers for CASSOD
    /// kinds). Matches the constructed module's parameter count exactly.
    pub fn weight_count(&self) -> u64 {
        match self.kind.cassod_variant() {
            Some(variant) => cassod_weight_count(variant, self.c_in, self.c_out),
            None => conv_weight_count(
                self.base_size,
                self.c_in,
                self.c_out,
                self.kind.is_depthwise(),
            ),
        }
    }

    /// `(base_size, dilation)` pairs contributing to the receptive field.
    fn rf_layers(&self) -> Vec<(usize, usize)> {
        if self.kind.is_cassod() {
            vec![(2, self.dilation); 2]
        } else {
            vec![(self.base_size, self.dilation)]
        }
    }

    /// The explicit convolution layers this descriptor stands for: itself,
    /// or the two-layer cascade for CASSOD kinds. Post-op flags stay on the
    /// first (additional) layer of a cascade.
    pub fn lowered(&self) -> Vec<LayerDescriptor> {
        let variant = match self.kind.cassod_variant() {
            None => return vec![self.clone()],
            Some(v) => v,
        };
        let sub = |index: usize| match &self.weights {
            WeightSpec::Seed(s) => WeightSpec::Seed(layer_seed(*s, index)),
            other => other.clone(),
        };
        let (c1, c2) = (self.c_in, self.c_out);
        // (kind, c_in, c_out) of the two cascade layers.
        let (l1, l2) = match variant {
            CassodVariant::A => (
                (LayerKind::DepthwiseConv, c1, c1),
                (LayerKind::DilatedConv, c1, c2),
            ),
            CassodVariant::CFirst => (
                (LayerKind::DilatedConv, c1, c1),
                (LayerKind::DilatedConv, c1, c2),
            ),
            CassodVariant::CSecond => (
                (LayerKind::DilatedConv, c1, c2),
                (LayerKind::DilatedConv, c2, c2),
            ),
            CassodVariant::D => (
                (LayerKind::DepthwiseConv, c1, c1),
                (LayerKind::DepthwiseConv, c1, c1),
            ),
        };
        vec![
            LayerDescriptor {
                kind: l1.0,
                base_size: 2,
                dilation: self.dilation,
                c_in: l1.1,
                c_out: l1.2,
                bn: self.bn,
                relu: self.relu,
                weights: sub(0),
            },
            LayerDescriptor {
                kind: l2.0,
                base_size: 2,
                dilation: self.dilation,
                c_in: l2.1,
                c_out: l2.2,
                bn: false,
                relu: false,
                weights: sub(1),
            },
        ]
    }
}

impl fmt::Display for LayerDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "layer {} k={} d={} in={} out={}",
            self.kind, self.base_size, self.dilation, self.c_in, self.c_out
        )?;
        if self.bn {
            f.write_str(" bn")?;
        }
        if self.relu {
            f.write_str(" relu")?;
        }
        write!(f, " weights={}", self.weights)
    }
}

/// A named sequential stack with a fixed input shape.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDescriptor {
    pub name: String,
    /// `(channels, height, width)`.
    pub input_shape: (usize, usize, usize),
    pub layers: Vec<LayerDescriptor>,
}

impl fmt::Display for NetworkDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "network {} input {}x{}x{}",
            self.name, self.input_shape.0, self.input_shape.1, self.input_shape.2
        )?;
        for layer in &self.layers {
            writeln!(f, "{layer}")?;
        }
        Ok(())
    }
}

/// Tokens of one line with their 1-based starting columns.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (col, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push((s + 1, &line[s..col]));
            }
        } else if start.is_none() {
            start = Some(col);
        }
    }
    if let Some(s) = start {
        tokens.push((s + 1, &line[s..]));
    }
    tokens
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_shape(line: usize, column: usize, token: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = token.split('x').collect();
    if parts.len() != 3 {
        return Err(parse_err(
            line,
            column,
            format!("expected <C>x<H>x<W>, got `{token}`"),
        ));
    }
    let mut dims = [0usize; 3];
    for (slot, part) in dims.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| {
            parse_err(line, column, format!("bad dimension `{part}` in `{token}`"))
        })?;
        if *slot == 0 {
            return Err(parse_err(line, column, "dimensions must be positive"));
        }
    }
    Ok((dims[0], dims[1], dims[2]))
}

/// Parses `.cassod-net` text into a validated [`NetworkDescriptor`].
/// Returns the first syntax error (line, column) or semantic error (layer
/// index) encountered.
pub fn parse_network(text: &str) -> Result<NetworkDescriptor> {
    let mut header: Option<(String, (usize, usize, usize))> = None;
    let mut layers = Vec::new();
    let mut last_line = 0;

    for (line_no, raw) in text.lines().enumerate() {
        let line_no = line_no + 1;
        last_line = line_no;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let tokens = tokenize(line);
        if tokens.is_empty() {
            continue;
        }
        let (col0, word) = tokens[0];
        match word {
            "network" => {
                if header.is_some() {
                    return Err(parse_err(line_no, col0, "duplicate network header"));
                }
                if !layers.is_empty() {
                    return Err(parse_err(line_no, col0, "header must precede layers"));
                }
                if tokens.len() != 4 || tokens[2].1 != "input" {
                    return Err(parse_err(
                        line_no,
                        col0,
                        "expected `network <name> input <C>x<H>x<W>`",
                    ));
                }
                let name = tokens[1].1.to_string();
                let shape = parse_shape(line_no, tokens[3].0, tokens[3].1)?;
                header = Some((name, shape));
            }
            "layer" => {
                if header.is_none() {
                    return Err(parse_err(
                        line_no,
                        col0,
                        "layer before the `network` header",
                    ));
                }
                if tokens.len() < 2 {
                    return Err(parse_err(line_no, col0, "missing layer kind"));
                }
                let (kcol, kname) = tokens[1];
                let kind = LayerKind::from_name(kname).ok_or_else(|| {
                    parse_err(line_no, kcol, format!("unknown layer kind `{kname}`"))
                })?;

                let mut base_size = None;
                let mut dilation = None;
                let mut c_in = None;
                let mut c_out = None;
                let mut weights = None;
                let mut bn = false;
                let mut relu = false;

                for &(col, tok) in &tokens[2..] {
                    match tok {
                        "bn" => {
                            if bn {
                                return Err(parse_err(line_no, col, "duplicate `bn` flag"));
                            }
                            bn = true;
                        }
                        "relu" => {
                            if relu {
                                return Err(parse_err(line_no, col, "duplicate `relu` flag"));
                            }
                            relu = true;
                        }
                        _ => {
                            let (key, value) = tok.split_once('=').ok_or_else(|| {
                                parse_err(line_no, col, format!("unknown token `{tok}`"))
                            })?;
                            let parse_usize = |v: &str| -> Result<usize> {
                                v.parse().map_err(|_| {
                                    parse_err(line_no, col, format!("bad value `{v}` for `{key}`"))
                                })
                            };
                            let dup = |name: &str| {
                                parse_err(line_no, col, format!("duplicate key `{name}`"))
                            };
                            match key {
                                "k" => {
                                    if base_size.replace(parse_usize(value)?).is_some() {
                                        return Err(dup("k"));
                                    }
                                }
                                "d" => {
                                    if dilation.replace(parse_usize(value)?).is_some() {
                                        return Err(dup("d"));
                                    }
                                }
                                "in" => {
                                    if c_in.replace(parse_usize(value)?).is_some() {
                                        return Err(dup("in"));
                                    }
                                }
                                "out" => {
                                    if c_out.replace(parse_usize(value)?).is_some() {
                                        return Err(dup("out"));
                                    }
                                }
                                "weights" => {
                                    let spec = WeightSpec::parse(value).ok_or_else(|| {
                                        parse_err(
                                            line_no,
                                            col,
                                            format!("bad weight spec `{value}`"),
                                        )
                                    })?;
                                    if weights.replace(spec).is_some() {
                                        return Err(dup("weights"));
                                    }
                                }
                                _ => {
                                    return Err(parse_err(
                                        line_no,
                                        col,
                                        format!("unknown key `{key}`"),
                                    ))
                                }
                            }
                        }
                    }
                }

                let missing =
                    |name: &str| parse_err(line_no, col0, format!("missing required key `{name}`"));
                layers.push(LayerDescriptor {
                    kind,
                    base_size: base_size.ok_or_else(|| missing("k"))?,
                    dilation: dilation.unwrap_or(1),
                    c_in: c_in.ok_or_else(|| missing("in"))?,
                    c_out: c_out.ok_or_else(|| missing("out"))?,
                    bn,
                    relu,
                    weights: weights.unwrap_or(WeightSpec::Zeros),
                });
            }
            _ => {
                return Err(parse_err(
                    line_no,
                    col0,
                    format!("expected `network` or `layer`, got `{word}`"),
                ))
            }
        }
    }

    let (name, input_shape) = header.ok_or_else(|| parse_err(1, 1, "missing network header"))?;
    if layers.is_empty() {
        return Err(parse_err(
            last_line.max(1),
            1,
            "network needs at least one layer",
        ));
    }
    let network = NetworkDescriptor {
        name,
        input_shape,
        layers,
    };
    validate(&network)?;
    Ok(network)
}

/// Reads and parses a `.cassod-net` file.
pub fn read_network_file(path: impl AsRef<Path>) -> Result<NetworkDescriptor> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_network(&text)
}

fn semantic(index: usize, message: impl Into<String>) -> Error {
    Error::Semantic {
        index,
        message: message.into(),
    }
}

/// Structural checks: per-layer filter geometry and kind constraints plus the
/// channel chain. Errors carry the 0-based layer index.
pub fn validate(network: &NetworkDescriptor) -> Result<()> {
    if network.layers.is_empty() {
        return Err(semantic(0, "network has no layers"));
    }
    let mut channels = network.input_shape.0;
    for (index, layer) in network.layers.iter().enumerate() {
        if layer.base_size > MAX_BASE_SIZE || layer.base_size == 0 {
            return Err(semantic(
                index,
                format!(
                    "filter size {} outside the supported 1..={} range",
                    layer.base_size, MAX_BASE_SIZE
                ),
            ));
        }
        if layer.c_in == 0 || layer.c_out == 0 {
            return Err(semantic(index, "channel counts must be positive"));
        }
        if layer.kind.is_cassod() && layer.base_size != 2 {
            return Err(semantic(
                index,
                format!("{} requires k=2, got k={}", layer.kind, layer.base_size),
            ));
        }
        if layer.kind == LayerKind::Conv && layer.dilation != 1 {
            return Err(semantic(
                index,
                format!(
                    "conv runs at d=1; use dilated-conv for d={}",
                    layer.dilation
                ),
            ));
        }
        // Tap geometry (rejects odd D for even filter sizes).
        if let Err(e) = tap_offsets(layer.base_size, layer.dilation) {
            return Err(semantic(index, e.to_string()));
        }
        let preserves_channels =
            layer.kind == LayerKind::CassodD || layer.kind == LayerKind::DepthwiseConv;
        if preserves_channels && layer.c_in != layer.c_out {
            return Err(semantic(
                index,
                format!(
                    "{} preserves the channel count (in={}, out={})",
                    layer.kind, layer.c_in, layer.c_out
                ),
            ));
        }
        if layer.kind.is_cassod() {
            if let WeightSpec::File(p) = &layer.weights {
                return Err(semantic(
                    index,
                    format!(
                        "weights=file:{} is only supported for plain convolution layers",
                        p.display()
                    ),
                ));
            }
        }
        if layer.c_in != channels {
            return Err(semantic(
                index,
                format!("layer expects in={} but the chain carries {channels}", layer.c_in),
            ));
        }
        channels = layer.c_out;
    }
    Ok(())
}

/// Replaces every CASSOD layer with its two constituent 2×2 dilated layers;
/// other layers pass through unchanged. Idempotent, and preserves the forward
/// pass exactly (sub-seeds follow [`cascade::layer_seed`]).
pub fn lower(network: &NetworkDescriptor) -> NetworkDescriptor {
    NetworkDescriptor {
        name: network.name.clone(),
        input_shape: network.input_shape,
        layers: network
            .layers
            .iter()
            .flat_map(|layer| layer.lowered())
            .collect(),
    }
}

fn load_weight_file(layer: &LayerDescriptor, path: &Path) -> Result<Vec<f64>> {
    let t = Tensor::read_file(path)?;
    let planes = if layer.kind.is_depthwise() {
        layer.c_in
    } else {
        layer.c_out * layer.c_in
    };
    let k = layer.base_size;
    if t.shape() != (planes, k, k) {
        return Err(Error::shape(format!(
            "weight file {} has shape {}x{}x{}, layer needs {planes}x{k}x{k} \
             (one plane per (out, in) pair in out-major order)",
            path.display(),
            t.shape().0,
            t.shape().1,
            t.shape().2
        )));
    }
    Ok(t.data().to_vec())
}

/// Kernels plus post-ops for one non-CASSOD layer descriptor.
fn build_plain_layer(layer: &LayerDescriptor) -> Result<(KernelSet, cascade::PostOps)> {
    debug_assert!(!layer.kind.is_cassod());
    let post = PostSpec {
        bn: layer.bn,
        relu: layer.relu,
    };
    match &layer.weights {
        WeightSpec::File(path) => {
            let weights = load_weight_file(layer, path)?;
            let kernels = if layer.kind.is_depthwise() {
                KernelSet::depthwise(layer.base_size, layer.dilation, layer.c_in, weights)?
            } else {
                KernelSet::full(
                    layer.base_size,
                    layer.dilation,
                    layer.c_in,
                    layer.c_out,
                    weights,
                )?
            };
            // File weights carry no affine parameters; bn folds to identity.
            let (_, post_ops) = build_layer(
                layer.base_size,
                layer.dilation,
                1,
                layer.c_out,
                false,
                cascade::WeightSource::Zeros,
                post,
            )?;
            Ok((kernels, post_ops))
        }
        other => build_layer(
            layer.base_size,
            layer.dilation,
            layer.c_in,
            layer.c_out,
            layer.kind.is_depthwise(),
            other.as_source()?,
            post,
        ),
    }
}

fn forward_layer(layer: &LayerDescriptor, input: &Tensor) -> Result<Tensor> {
    if let Some(variant) = layer.kind.cassod_variant() {
        let module = build_cassod(
            variant,
            layer.c_in,
            layer.c_out,
            layer.dilation,
            CascadePostSpec {
                layer1: PostSpec {
                    bn: layer.bn,
                    relu: layer.relu,
                },
                layer2: PostSpec::default(),
            },
            layer.weights.as_source()?,
        )?;
        return module.forward(input);
    }
    let (kernels, post) = build_plain_layer(layer)?;
    let out = if layer.base_size == 2 {
        dilated_conv_2x2(input, &kernels, Padding::SameZero)?
    } else {
        conv2d_ref(input, &kernels, Padding::SameZero)?
    };
    post.apply(&out)
}

/// Executes the network on `input` (same-zero padding throughout, so the
/// spatial size never changes). CASSOD layers run through the cascade module;
/// lowering first gives bit-identical results.
pub fn forward(network: &NetworkDescriptor, input: &Tensor) -> Result<Tensor> {
    validate(network)?;
    if input.shape() != network.input_shape {
        return Err(Error::shape(format!(
            "input tensor is {:?} but the network expects {:?}",
            input.shape(),
            network.input_shape
        )));
    }
    let mut t = input.clone();
    for (index, layer) in network.layers.iter().enumerate() {
        t = forward_layer(layer, &t).map_err(|e| semantic(index, e.to_string()))?;
    }
    Ok(t)
}

/// Cycle-model geometries of the lowered network, one per explicit
/// convolution layer.
pub fn network_geometries(network: &NetworkDescriptor) -> Result<Vec<LayerGeometry>> {
    validate(network)?;
    let (_, h, w) = network.input_shape;
    Ok(lower(network)
        .layers
        .iter()
        .map(|l| LayerGeometry {
            kind: l.kind.name().to_string(),
            base_size: l.base_size,
            dilation: l.dilation,
            c_in: l.c_in,
            c_out: l.c_out,
            out_h: h,
            out_w: w,
            depthwise: l.kind.is_depthwise(),
        })
        .collect())
}

/// One row of the analysis table, at the granularity of the original
/// descriptors (a CASSOD layer reports its whole cascade).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerAnalysis {
    pub index: usize,
    pub kind: LayerKind,
    pub base_size: usize,
    pub dilation: usize,
    pub c_in: usize,
    pub c_out: usize,
    pub weights: u64,
    pub macs: u64,
    /// Receptive-field side after this layer.
    pub receptive_field: usize,
    pub cycles_baseline: u64,
    pub cycles_pixel_array: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisTotals {
    pub weights: u64,
    pub macs: u64,
    pub receptive_field: usize,
    pub cycles_baseline: u64,
    pub cycles_pixel_array: u64,
    pub fps_baseline: f64,
    pub fps_pixel_array: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkAnalysis {
    pub layers: Vec<LayerAnalysis>,
    pub totals: AnalysisTotals,
}

/// Per-layer weights, MACs, cumulative receptive field, and simulated cycles
/// in both hardware modes.
pub fn analyze(network: &NetworkDescriptor, hw: &HwConfig) -> Result<NetworkAnalysis> {
    validate(network)?;
    let (_, h, w) = network.input_shape;
    let mut rows = Vec::with_capacity(network.layers.len());
    let mut rf_stack: Vec<(usize, usize)> = Vec::new();

    for (index, layer) in network.layers.iter().enumerate() {
        rf_stack.extend(layer.rf_layers());
        let weights = layer.weight_count();
        let macs = cascade::mac_count(weights, h, w);
        let mut cycles_baseline = 0u64;
        let mut cycles_pixel_array = 0u64;
        for sub in layer.lowered() {
            let geometry = LayerGeometry {
                kind: sub.kind.name().to_string(),
                base_size: sub.base_size,
                dilation: sub.dilation,
                c_in: sub.c_in,
                c_out: sub.c_out,
                out_h: h,
                out_w: w,
                depthwise: sub.kind.is_depthwise(),
            };
            let err_at = |e: Error| semantic(index, e.to_string());
            cycles_baseline += hwsim::layer_cycles(&geometry, hw, CycleMode::Baseline)
                .map_err(err_at)?
                .cycles;
            cycles_pixel_array += hwsim::layer_cycles(&geometry, hw, CycleMode::PixelArray)
                .map_err(err_at)?
                .cycles;
        }
        rows.push(LayerAnalysis {
            index,
            kind: layer.kind,
            base_size: layer.base_size,
            dilation: layer.dilation,
            c_in: layer.c_in,
            c_out: layer.c_out,
            weights,
            macs,
            receptive_field: receptive_field(&rf_stack),
            cycles_baseline,
            cycles_pixel_array,
        });
    }

    let weights = rows.iter().map(|r| r.weights).sum();
    let macs = rows.iter().map(|r| r.macs).sum();
    let cycles_baseline = rows.iter().map(|r| r.cycles_baseline).sum::<u64>();
    let cycles_pixel_array = rows.iter().map(|r| r.cycles_pixel_array).sum::<u64>();
    let totals = AnalysisTotals {
        weights,
        macs,
        receptive_field: receptive_field(&rf_stack),
        cycles_baseline,
        cycles_pixel_array,
        fps_baseline: hw.clock_hz / cycles_baseline as f64,
        fps_pixel_array: hw.clock_hz / cycles_pixel_array as f64,
    };
    Ok(NetworkAnalysis {
        layers: rows,
        totals,
    })
}
