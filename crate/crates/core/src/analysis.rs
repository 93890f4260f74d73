//! Exhaustive error measurement over every input code.
//!
//! Errors are measured against the unquantized tanh, so even a perfectly
//! rounded unit shows up to half an output ulp of error.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::baselines::{pwl_tanh, reference_tanh, taylor_tanh, PwlTable};
use crate::datapath::{Subtractor, TanhConfig, TanhUnit, Variant};
use crate::error::{Error, Result};
use crate::fxnum::{quantize, Fx, QFormat, RoundMode};

/// Widest input format [`exhaustive_sweep`] accepts.
pub const MAX_SWEEP_WIDTH: u32 = 24;

/// Codes per work item. Partial results are merged in code order, so the
/// report does not depend on how many workers ran.
const BLOCK: i64 = 1 << 12;

/// Input magnitude beyond which `b`-bit output tanh rounds to `1 - 2^-b`:
/// `artanh(1 - 2^-b) = ln(2^(b+1) - 1) / 2`.
pub fn clamp_threshold(b: u32) -> f64 {
    0.5 * ((f64::from(b) + 1.0).exp2() - 1.0).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub config: String,
    /// Against the unquantized reference.
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
    /// `max_abs_error` in output ulps.
    pub max_error_ulps: f64,
    /// Largest distance, in output ulps, from the correctly rounded result.
    pub max_ulps_vs_rounded: f64,
    pub worst_input: Fx,
    pub samples: u64,
}

#[derive(Debug, Clone, Copy)]
struct Partial {
    max: f64,
    worst: i64,
    sum: f64,
    max_rounded: i64,
}

/// Runs `eval` on every code of `input_fmt` and measures it against tanh.
pub fn sweep_with<F>(
    label: &str,
    input_fmt: QFormat,
    output_fmt: QFormat,
    jobs: Option<usize>,
    eval: F,
) -> Result<ErrorReport>
where
    F: Fn(Fx) -> Result<Fx> + Sync,
{
    if input_fmt.width() > MAX_SWEEP_WIDTH {
        return Err(Error::SweepTooWide(input_fmt));
    }
    let (lo, hi) = (input_fmt.min_code(), input_fmt.max_code());
    let block = |start: i64| -> Result<Partial> {
        let mut p = Partial {
            max: -1.0,
            worst: start,
            sum: 0.0,
            max_rounded: 0,
        };
        for code in start..=(start + BLOCK - 1).min(hi) {
            let x = Fx::new(code, input_fmt)?;
            let y = eval(x)?;
            let exact = reference_tanh(x.to_real());
            let err = (y.to_real() - exact).abs();
            if err > p.max {
                p.max = err;
                p.worst = code;
            }
            p.sum += err;
            let rounded = quantize(exact, output_fmt, RoundMode::NearestEven);
            p.max_rounded = p.max_rounded.max((y.code() - rounded.code()).abs());
        }
        Ok(p)
    };
    let starts: Vec<i64> = (lo..=hi).step_by(BLOCK as usize).collect();
    let run = || starts.par_iter().map(|&s| block(s)).collect::<Result<Vec<_>>>();
    let partials = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let merged = partials
        .into_iter()
        .reduce(|a, b| Partial {
            max: a.max.max(b.max),
            worst: if b.max > a.max { b.worst } else { a.worst },
            sum: a.sum + b.sum,
            max_rounded: a.max_rounded.max(b.max_rounded),
        })
        .expect("at least one block");
    let samples = (hi - lo + 1) as u64;
    Ok(ErrorReport {
        config: label.to_string(),
        max_abs_error: merged.max,
        mean_abs_error: merged.sum / samples as f64,
        max_error_ulps: merged.max / output_fmt.ulp(),
        max_ulps_vs_rounded: merged.max_rounded as f64,
        worst_input: Fx::new(merged.worst, input_fmt)?,
        samples,
    })
}

/// Sweeps a built unit.
pub fn sweep_unit(unit: &TanhUnit, jobs: Option<usize>) -> Result<ErrorReport> {
    let cfg = unit.config();
    sweep_with(&cfg.summary(), cfg.input_fmt, cfg.output_fmt, jobs, |x| unit.eval(x))
}

pub fn exhaustive_sweep(cfg: &TanhConfig) -> Result<ErrorReport> {
    exhaustive_sweep_jobs(cfg, None)
}

pub fn exhaustive_sweep_jobs(cfg: &TanhConfig, jobs: Option<usize>) -> Result<ErrorReport> {
    if cfg.input_fmt.width() > MAX_SWEEP_WIDTH {
        return Err(Error::SweepTooWide(cfg.input_fmt));
    }
    sweep_unit(&TanhUnit::new(*cfg)?, jobs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Row {
    /// 0 means the division is done in real arithmetic.
    pub nr_stages: u32,
    pub subtractor: Subtractor,
    pub max_error: f64,
    pub report: ErrorReport,
}

/// Stage counts and subtractors of the divider accuracy table, in order.
pub const TABLE2_GRID: [(u32, Subtractor); 6] = [
    (0, Subtractor::Ones),
    (0, Subtractor::Twos),
    (2, Subtractor::Ones),
    (2, Subtractor::Twos),
    (3, Subtractor::Ones),
    (3, Subtractor::Twos),
];

/// One exhaustive sweep per `(nr_stages, subtractor)` combination of
/// [`TABLE2_GRID`], everything else taken from `base`.
pub fn table2(base: &TanhConfig) -> Result<Vec<Table2Row>> {
    table2_jobs(base, None)
}

pub fn table2_jobs(base: &TanhConfig, jobs: Option<usize>) -> Result<Vec<Table2Row>> {
    TABLE2_GRID
        .iter()
        .map(|&(nr_stages, subtractor)| {
            let cfg = TanhConfig {
                nr_stages,
                subtractor,
                ..*base
            };
            let report = exhaustive_sweep_jobs(&cfg, jobs)?;
            Ok(Table2Row {
                nr_stages,
                subtractor,
                max_error: report.max_abs_error,
                report,
            })
        })
        .collect()
}

pub fn render_table2(rows: &[Table2Row]) -> String {
    let mut out = String::from("stages  subtractor  max_error    max_ulps\n");
    for r in rows {
        let stages = if r.nr_stages == 0 {
            "0 (div)".to_string()
        } else {
            r.nr_stages.to_string()
        };
        let _ = writeln!(
            out,
            "{stages:<7} {:<11} {:<12.4e} {:.3}",
            r.subtractor, r.max_error, r.report.max_error_ulps
        );
    }
    out
}

/// Error reports of the optimized unit, the published unit, PWL and Taylor
/// over the same input grid. Baselines are computed in `f64` and rounded
/// only at the output.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodComparison {
    pub optimized: ErrorReport,
    pub published: ErrorReport,
    pub pwl: ErrorReport,
    pub taylor: ErrorReport,
}

impl MethodComparison {
    pub fn reports(&self) -> [&ErrorReport; 4] {
        [&self.optimized, &self.published, &self.pwl, &self.taylor]
    }
}

pub fn compare_methods(
    cfg: &TanhConfig,
    pwl: &PwlTable,
    taylor_terms: usize,
    jobs: Option<usize>,
) -> Result<MethodComparison> {
    taylor_tanh(0.0, taylor_terms)?;
    let variant = |variant| TanhConfig { variant, ..*cfg };
    let (inp, out) = (cfg.input_fmt, cfg.output_fmt);
    let round = move |y: f64| Ok(quantize(y, out, RoundMode::NearestEven));
    Ok(MethodComparison {
        optimized: exhaustive_sweep_jobs(&variant(Variant::Optimized), jobs)?,
        published: exhaustive_sweep_jobs(&variant(Variant::Published), jobs)?,
        pwl: sweep_with(&format!("pwl knots={}", pwl.knots().len()), inp, out, jobs, |x| {
            round(pwl_tanh(x.to_real(), pwl))
        })?,
        taylor: sweep_with(&format!("taylor terms={taylor_terms}"), inp, out, jobs, |x| {
            round(taylor_tanh(x.to_real(), taylor_terms)?)
        })?,
    })
}

pub const CSV_COLUMNS: [&str; 6] = [
    "config",
    "max_abs_error",
    "mean_abs_error",
    "max_error_ulps",
    "worst_input_hex",
    "samples",
];

fn worst_hex(r: &ErrorReport) -> String {
    let digits = r.worst_input.fmt().width().div_ceil(4) as usize;
    format!("0x{:0digits$x}", r.worst_input.bit_pattern())
}

pub fn render_csv<'a>(reports: impl IntoIterator<Item = &'a ErrorReport>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in reports {
        w.write_record([
            r.config.clone(),
            format!("{:e}", r.max_abs_error),
            format!("{:e}", r.mean_abs_error),
            format!("{}", r.max_error_ulps),
            worst_hex(r),
            r.samples.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render_text<'a>(reports: impl IntoIterator<Item = &'a ErrorReport>) -> String {
    let reports: Vec<&ErrorReport> = reports.into_iter().collect();
    let width = reports
        .iter()
        .map(|r| r.config.len())
        .max()
        .unwrap_or(0)
        .max("config".len());
    let mut out = format!(
        "{:<width$}  {:>12}  {:>12}  {:>8}  {:>10}  {:>8}\n",
        "config", "max_abs", "mean_abs", "max_ulps", "worst", "samples"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>12.4e}  {:>12.4e}  {:>8.3}  {:>10}  {:>8}",
            r.config,
            r.max_abs_error,
            r.mean_abs_error,
            r.max_error_ulps,
            worst_hex(r),
            r.samples
        );
    }
    out
}
