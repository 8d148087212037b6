//! The `cassod` command-line front end.
//!
//! Subcommands:
//!
//! * `report <network>` — per-layer weights, MACs, receptive fields and
//!   simulated cycles; `--csv` additionally writes the cycle CSV schema at
//!   the lowered (per-convolution) granularity;
//! * `run <network> <input> [golden]` — forward pass over tensor files with
//!   an optional golden comparison;
//! * `sweep` — cycles per dilation rate in both hardware modes (or the gate
//!   model per stage count with `--gates`), as CSV.
//!
//! Exit codes are stable: 0 success, 1 golden mismatch, 2 usage or semantic
//! error, 3 I/O error. `CASSOD_THREADS` caps worker threads without changing
//! any result.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::hwsim::{
    self, gate_count, layer_cycles, network_cycles, CycleEntry, CycleMode, HwConfig,
    PixelArrayConfig, CSV_HEADER,
};
use crate::netdesc::{self, LayerDescriptor, LayerKind, NetworkAnalysis, WeightSpec};
use crate::tensor::Tensor;

#[derive(Debug, Parser)]
#[command(
    name = "cassod",
    version,
    about = "Cascaded 2x2 dilated convolution toolkit and accelerator cost model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct HwFlags {
    /// Parallel MAC lanes per cycle.
    #[arg(long, default_value_t = 512)]
    macs_per_cycle: u64,
    /// Fixed cycles charged per layer.
    #[arg(long, default_value_t = 1000)]
    setup_cycles: u64,
    /// Clock frequency in MHz.
    #[arg(long, default_value_t = 400.0)]
    clock_mhz: f64,
    /// Pixel-array stage count H (supports D up to 2^H - 1).
    #[arg(long, default_value_t = 3)]
    stages: usize,
    /// Gates outside the pixel array.
    #[arg(long, default_value_t = 1.9e6)]
    base_gates: f64,
    /// Gates per pixel-array stage.
    #[arg(long, default_value_t = 0.5e6 / 3.0)]
    gates_per_stage: f64,
}

impl HwFlags {
    fn to_config(&self) -> HwConfig {
        HwConfig {
            macs_per_cycle: self.macs_per_cycle,
            setup_cycles_per_layer: self.setup_cycles,
            clock_hz: self.clock_mhz * 1.0e6,
            base_gates: self.base_gates,
            gates_per_stage: self.gates_per_stage,
            pixel_array: PixelArrayConfig {
                stages: self.stages,
                ..PixelArrayConfig::default()
            },
            ..HwConfig::default()
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze a network file: weights, MACs, receptive fields, cycles.
    Report {
        /// Path to a `.cassod-net` file.
        network: PathBuf,
        /// Also write per-layer cycle rows (lowered granularity) as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        hw: HwFlags,
    },
    /// Execute a network on an input tensor, optionally checking a golden.
    Run {
        /// Path to a `.cassod-net` file.
        network: PathBuf,
        /// Input tensor file (`tensor v1` format).
        input: PathBuf,
        /// Golden tensor to compare the output against.
        golden: Option<PathBuf>,
        /// Where to write the output tensor (default `<input>.out.tensor`).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Maximum absolute difference accepted against the golden.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Ignore pixels closer than this to any spatial border.
        #[arg(long, default_value_t = 0)]
        interior_margin: usize,
    },
    /// Sweep dilation rates (or stage counts with --gates) and emit CSV.
    Sweep {
        /// Base filter size.
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        d_min: usize,
        #[arg(long, default_value_t = 3)]
        d_max: usize,
        /// Input and output channel count of the swept layer.
        #[arg(long, default_value_t = 64)]
        channels: usize,
        /// Square feature-map side length.
        #[arg(long, default_value_t = 128)]
        size: usize,
        /// Also report the CASSOD replacement of each 3x3 layer
        /// (a, c-first, c-second or d); rows appear for even D only.
        #[arg(long)]
        cassod: Option<String>,
        /// Sweep the gate model over H = 0..=h-max instead of cycles.
        #[arg(long)]
        gates: bool,
        #[arg(long, default_value_t = 6)]
        h_max: usize,
        /// Write CSV here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        hw: HwFlags,
    },
}

/// Outcome of `run`: where the output went and how it compared.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub output_path: PathBuf,
    pub comparison: Option<Comparison>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub max_abs_diff: f64,
    pub max_rel_diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => 3,
        _ => 2,
    }
}

/// Entry point used by the `cassod` binary; returns the process exit code.
pub fn main() -> i32 {
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return 2;
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Report { network, csv, hw } => cmd_report(&network, csv.as_deref(), &hw.to_config()),
        Command::Run {
            network,
            input,
            golden,
            output,
            tolerance,
            interior_margin,
        } => cmd_run(
            &network,
            &input,
            golden.as_deref(),
            output.as_deref(),
            tolerance,
            interior_margin,
        )
        .map(|result| {
            if let Some(c) = &result.comparison {
                if !c.pass {
                    return 1;
                }
            }
            0
        }),
        Command::Sweep {
            k,
            d_min,
            d_max,
            channels,
            size,
            cassod,
            gates,
            h_max,
            csv,
            hw,
        } => {
            let opts = SweepOptions {
                base_size: k,
                d_min,
                d_max,
                channels,
                size,
                cassod_kind: cassod,
                gates,
                h_max,
            };
            cmd_sweep(&opts, csv.as_deref(), &hw.to_config()).map(|()| 0)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    match std::env::var("CASSOD_THREADS") {
        Ok(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| format!("CASSOD_THREADS must be a positive integer, got `{v}`"))?;
            if n == 0 {
                return Err("CASSOD_THREADS must be a positive integer".into());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| e.to_string())
        }
        Err(_) => Ok(()),
    }
}

fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let emit = |out: &mut String, cells: &[String]| {
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(&format!("{cell:<w$}"));
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    };
    emit(
        &mut out,
        &header.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
    );
    for row in rows {
        emit(&mut out, row);
    }
    out
}

fn analysis_table(analysis: &NetworkAnalysis) -> String {
    let header = [
        "index", "kind", "k", "d", "in", "out", "weights", "macs", "rf", "cycles(base)",
        "cycles(pa)",
    ];
    let mut rows: Vec<Vec<String>> = analysis
        .layers
        .iter()
        .map(|l| {
            vec![
                l.index.to_string(),
                l.kind.to_string(),
                l.base_size.to_string(),
                l.dilation.to_string(),
                l.c_in.to_string(),
                l.c_out.to_string(),
                l.weights.to_string(),
                l.macs.to_string(),
                l.receptive_field.to_string(),
                l.cycles_baseline.to_string(),
                l.cycles_pixel_array.to_string(),
            ]
        })
        .collect();
    let t = &analysis.totals;
    rows.push(vec![
        "total".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        t.weights.to_string(),
        t.macs.to_string(),
        t.receptive_field.to_string(),
        t.cycles_baseline.to_string(),
        t.cycles_pixel_array.to_string(),
    ]);
    render_table(&header, &rows)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// `report`: print the analysis table; optionally write lowered per-layer
/// cycle rows for both modes as CSV.
pub fn cmd_report(network_path: &Path, csv: Option<&Path>, hw: &HwConfig) -> Result<i32> {
    let network = netdesc::read_network_file(network_path)?;
    let analysis = netdesc::analyze(&network, hw)?;
    print!("network {} input {}x{}x{}\n{}", network.name, network.input_shape.0,
        network.input_shape.1, network.input_shape.2, analysis_table(&analysis));
    println!(
        "fps: baseline {:.2}, pixel-array {:.2}",
        analysis.totals.fps_baseline, analysis.totals.fps_pixel_array
    );

    if let Some(csv_path) = csv {
        let geometries = netdesc::network_geometries(&network)?;
        let mut text = String::new();
        text.push_str(CSV_HEADER);
        text.push('\n');
        for mode in [CycleMode::Baseline, CycleMode::PixelArray] {
            let report = network_cycles(&geometries, hw, mode)?;
            for entry in &report.entries {
                text.push_str(&entry.csv_row());
                text.push('\n');
            }
            text.push_str(&report.csv_totals_row());
            text.push('\n');
        }
        write_file(csv_path, &text)?;
    }
    Ok(0)
}

fn default_output_path(input: &Path) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_string());
    input.with_file_name(format!("{stem}.out.tensor"))
}

/// `run`: execute the network on a tensor file, write the output tensor, and
/// compare against a golden when one is given.
pub fn cmd_run(
    network_path: &Path,
    input_path: &Path,
    golden_path: Option<&Path>,
    output_path: Option<&Path>,
    tolerance: f64,
    interior_margin: usize,
) -> Result<RunResult> {
    let network = netdesc::read_network_file(network_path)?;
    let input = Tensor::read_file(input_path)?;
    let output = netdesc::forward(&network, &input)?;
    let output_path = output_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_output_path(input_path));
    output.write_file(&output_path)?;
    println!("wrote {}", output_path.display());

    let comparison = match golden_path {
        None => None,
        Some(golden_path) => {
            let golden = Tensor::read_file(golden_path)?;
            let max_abs_diff = output.max_abs_diff(&golden, interior_margin)?;
            let max_rel_diff = output.max_rel_diff(&golden, interior_margin)?;
            let pass = max_abs_diff <= tolerance;
            println!(
                "golden comparison: max_abs_diff {max_abs_diff:e} max_rel_diff {max_rel_diff:e} \
                 tolerance {tolerance:e} margin {interior_margin}: {}",
                if pass { "PASS" } else { "FAIL" }
            );
            Some(Comparison {
                max_abs_diff,
                max_rel_diff,
                tolerance,
                pass,
            })
        }
    };
    Ok(RunResult {
        output_path,
        comparison,
    })
}

/// Everything `sweep` needs besides hardware flags.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub base_size: usize,
    pub d_min: usize,
    pub d_max: usize,
    pub channels: usize,
    pub size: usize,
    /// CASSOD variant short name (`a`, `c-first`, `c-second`, `d`).
    pub cassod_kind: Option<String>,
    pub gates: bool,
    pub h_max: usize,
}

fn cassod_kind_from_short(name: &str) -> Result<LayerKind> {
    Ok(match name {
        "a" => LayerKind::CassodA,
        "c-first" => LayerKind::CassodCFirst,
        "c-second" => LayerKind::CassodCSecond,
        "d" => LayerKind::CassodD,
        _ => {
            return Err(Error::shape(format!(
                "unknown cassod variant `{name}` (expected a, c-first, c-second or d)"
            )))
        }
    })
}

/// Sums the cycle entries of a lowered CASSOD replacement into a single row.
fn cassod_entry(
    kind: LayerKind,
    channels: usize,
    dilation: usize,
    size: usize,
    hw: &HwConfig,
    mode: CycleMode,
) -> Result<CycleEntry> {
    let descriptor = LayerDescriptor {
        kind,
        base_size: 2,
        dilation,
        c_in: channels,
        c_out: channels,
        bn: false,
        relu: false,
        weights: WeightSpec::Zeros,
    };
    let mut taps = 0;
    let mut macs = 0;
    let mut cycles = 0;
    for sub in descriptor.lowered() {
        let geometry = hwsim::LayerGeometry {
            kind: sub.kind.name().to_string(),
            base_size: sub.base_size,
            dilation: sub.dilation,
            c_in: sub.c_in,
            c_out: sub.c_out,
            out_h: size,
            out_w: size,
            depthwise: sub.kind.is_depthwise(),
        };
        let entry = layer_cycles(&geometry, hw, mode)?;
        taps += entry.taps_per_output;
        macs += entry.macs;
        cycles += entry.cycles;
    }
    Ok(CycleEntry {
        layer_index: 0,
        kind: kind.name().to_string(),
        base_size: 2,
        dilation,
        mode,
        taps_per_output: taps,
        macs,
        cycles,
        benefits_from_pixel_array: true,
    })
}

/// `sweep`: one CSV row per dilation rate per mode (plus CASSOD replacement
/// rows at even D), or the gate model per stage count with `--gates`.
pub fn cmd_sweep(opts: &SweepOptions, csv: Option<&Path>, hw: &HwConfig) -> Result<()> {
    let mut text = String::new();
    if opts.gates {
        text.push_str("h,pixel_array_gates,total_gates,pixel_array_share\n");
        for h in 0..=opts.h_max {
            let g = gate_count(h, hw);
            text.push_str(&format!(
                "{h},{:.1},{:.1},{:.6}\n",
                g.pixel_array_gates, g.total_gates, g.pixel_array_share
            ));
        }
    } else {
        if opts.d_min < 1 || opts.d_min > opts.d_max {
            return Err(Error::shape(format!(
                "invalid dilation range {}..={}",
                opts.d_min, opts.d_max
            )));
        }
        let cassod_kind = opts
            .cassod_kind
            .as_deref()
            .map(cassod_kind_from_short)
            .transpose()?;
        if cassod_kind.is_some() && opts.base_size != 3 {
            return Err(Error::shape(
                "--cassod compares against 3x3 dilated layers; use --k 3",
            ));
        }
        // Even filter sizes only admit even rates; sweep the valid ones.
        let rates: Vec<usize> = (opts.d_min..=opts.d_max)
            .filter(|d| opts.base_size % 2 == 1 || d % 2 == 0)
            .collect();
        if rates.is_empty() {
            return Err(Error::shape(format!(
                "no valid dilation rates for k={} in {}..={}",
                opts.base_size, opts.d_min, opts.d_max
            )));
        }
        text.push_str(CSV_HEADER);
        text.push('\n');
        for &d in &rates {
            let geometry = hwsim::LayerGeometry {
                kind: if opts.base_size == 3 {
                    "dilated-conv".to_string()
                } else {
                    format!("conv{}x{}", opts.base_size, opts.base_size)
                },
                base_size: opts.base_size,
                dilation: d,
                c_in: opts.channels,
                c_out: opts.channels,
                out_h: opts.size,
                out_w: opts.size,
                depthwise: false,
            };
            for mode in [CycleMode::Baseline, CycleMode::PixelArray] {
                let entry = layer_cycles(&geometry, hw, mode)?;
                text.push_str(&entry.csv_row());
                text.push('\n');
                if let Some(kind) = cassod_kind {
                    if d % 2 == 0 {
                        let entry =
                            cassod_entry(kind, opts.channels, d, opts.size, hw, mode)?;
                        text.push_str(&entry.csv_row());
                        text.push('\n');
                    }
                }
            }
        }
    }
    match csv {
        Some(path) => write_file(path, &text)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(())
}
