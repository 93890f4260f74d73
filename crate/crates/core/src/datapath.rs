//! Bit-accurate tanh pipelines.
//!
//! Both variants share the same outer dataflow: split off the sign, clamp the
//! magnitude to the domain the output format can resolve, compute tanh of
//! the magnitude, and restore the sign.
//!
//! * [`Variant::Optimized`]: grouped LUT lookups multiplied through a
//!   balanced tree give `f = e^(-2|x|)`, then `(1 - f) / (1 + f)` with the
//!   denominator normalised by a single right shift and inverted by
//!   Newton-Raphson.
//! * [`Variant::Published`]: per-bit factors `e^(2w)` for weights at or above
//!   a threshold, `(f - 1) / (f + 1)`, then the first-order correction
//!   `t + r (1 - t^2)` for the residual `r` below the threshold.

use std::fmt;

use crate::analysis::clamp_threshold;
use crate::error::{Error, Result};
use crate::fxnum::{
    abs_split, add_fx, mul_fx, ones_complement_sub1, quantize, requantize, scale_pow2, sub_fx, Fx, QFormat, RoundMode,
};
use crate::lutgen::{build_luts, shuffle_map, velocity_factor_original, GroupingScheme, VelocityLut};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Subtractor {
    /// `1 - f` by inverting the bits of `f` (one ulp low).
    Ones,
    #[default]
    Twos,
}

impl fmt::Display for Subtractor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subtractor::Ones => "1's",
            Subtractor::Twos => "2's",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    #[default]
    Optimized,
    Published,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Optimized => "optimized",
            Variant::Published => "published",
        })
    }
}

/// Linear Newton-Raphson starting value `x0 = c0 - c1 * d` for `d` in `[0.5, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrSeed {
    pub c0: f64,
    pub c1: f64,
}

impl NrSeed {
    /// `2.5 - 1.5 d`: dyadic constants (a shift and two adds), exact at
    /// `d = 1`, relative error at most 1/8 (reached at `d = 0.5`).
    pub const fn shift_add() -> Self {
        Self { c0: 2.5, c1: 1.5 }
    }

    /// `48/17 - 32/17 d`: the minimax linear seed, relative error at most 1/17.
    pub const fn minimax() -> Self {
        Self {
            c0: 48.0 / 17.0,
            c1: 32.0 / 17.0,
        }
    }

    pub fn eval(&self, d: f64) -> f64 {
        self.c0 - self.c1 * d
    }
}

impl Default for NrSeed {
    fn default() -> Self {
        Self::shift_add()
    }
}

/// Full pipeline configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhConfig {
    /// Signed input format, e.g. `s3.12`.
    pub input_fmt: QFormat,
    /// Signed fractional-only output format, e.g. `s.15`.
    pub output_fmt: QFormat,
    /// Unsigned fractional LUT entry format, e.g. `u0.18`.
    pub lut_fmt: QFormat,
    /// Unsigned fractional multiplier output format, e.g. `u0.16`.
    pub mult_fmt: QFormat,
    pub grouping: GroupingScheme,
    /// Newton-Raphson iterations; 0 divides in real arithmetic instead.
    pub nr_stages: u32,
    pub subtractor: Subtractor,
    pub variant: Variant,
    /// Published variant only: weights below `2^published_threshold` go
    /// through the first-order correction instead of the factor product.
    pub published_threshold: i32,
    /// Rounding of every internal multiplier and rescale.
    pub internal_round: RoundMode,
    pub seed: NrSeed,
}

impl TanhConfig {
    /// s3.12 in, s.15 out, 18-bit LUTs, 16-bit multipliers, 4-bit shuffled
    /// groups, three NR stages, exact subtractor.
    pub fn reference() -> Self {
        Self {
            input_fmt: QFormat::s(3, 12),
            output_fmt: QFormat::s(0, 15),
            lut_fmt: QFormat::u(0, 18),
            mult_fmt: QFormat::u(0, 16),
            grouping: GroupingScheme::default(),
            nr_stages: 3,
            subtractor: Subtractor::Twos,
            variant: Variant::Optimized,
            published_threshold: -7,
            internal_round: RoundMode::NearestEven,
            seed: NrSeed::default(),
        }
    }

    /// s3.5 in (a 9-bit word), s.7 out; LUT and multiplier widths follow the
    /// reference ratios (output bits + 3 and + 1).
    pub fn small() -> Self {
        Self {
            input_fmt: QFormat::s(3, 5),
            output_fmt: QFormat::s(0, 7),
            lut_fmt: QFormat::u(0, 10),
            mult_fmt: QFormat::u(0, 8),
            published_threshold: -3,
            ..Self::reference()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.input_fmt.is_signed() {
            return Err(Error::RequiresSigned(self.input_fmt));
        }
        if self.input_fmt.width() > 32 {
            return Err(Error::Config(format!(
                "input format {} wider than 32 bits",
                self.input_fmt
            )));
        }
        if !self.output_fmt.is_signed() || self.output_fmt.int_bits() != 0 || self.output_fmt.frac_bits() == 0 {
            return Err(Error::Config(format!(
                "output format {} must be signed and fractional-only",
                self.output_fmt
            )));
        }
        if !self.lut_fmt.is_unsigned_fraction() {
            return Err(Error::RequiresUnsignedFraction(self.lut_fmt));
        }
        if !self.mult_fmt.is_unsigned_fraction() {
            return Err(Error::RequiresUnsignedFraction(self.mult_fmt));
        }
        if self.mult_fmt.frac_bits() > 28 || self.lut_fmt.frac_bits() > 40 {
            return Err(Error::Config("LUT or multiplier precision too wide".into()));
        }
        if !(self.seed.c0.is_finite() && self.seed.c1.is_finite()) {
            return Err(Error::Config("non-finite Newton-Raphson seed".into()));
        }
        Ok(())
    }

    /// Output fractional bits `b`.
    pub fn output_bits(&self) -> u32 {
        self.output_fmt.frac_bits()
    }

    fn mf(&self) -> u32 {
        self.mult_fmt.frac_bits()
    }

    /// `f` including the exact value 1.0.
    pub fn factor_fmt(&self) -> QFormat {
        QFormat::u(1, self.mf())
    }

    /// `(1 + f) / 2`.
    pub fn denominator_fmt(&self) -> QFormat {
        QFormat::u(0, self.mf() + 1)
    }

    /// Newton-Raphson iterates, in `(0, 2]`.
    pub fn reciprocal_fmt(&self) -> QFormat {
        QFormat::u(2, self.mf())
    }

    pub fn magnitude_fmt(&self) -> QFormat {
        self.input_fmt.unsigned_counterpart()
    }

    /// Short one-line summary used in reports.
    pub fn summary(&self) -> String {
        let nr = if self.nr_stages == 0 {
            "div".to_string()
        } else {
            format!("nr{}", self.nr_stages)
        };
        let grouping = format!(
            "g{}{}",
            self.grouping.group_width(),
            if self.grouping.shuffle() { "s" } else { "" }
        );
        let mut s = format!(
            "{}->{} lut={} mult={} {} {} sub={} {}",
            self.input_fmt, self.output_fmt, self.lut_fmt, self.mult_fmt, grouping, nr, self.subtractor, self.variant
        );
        if self.variant == Variant::Published {
            s += &format!(" thr=2^{}", self.published_threshold);
        }
        if self.internal_round == RoundMode::Truncate {
            s += " trunc";
        }
        if self.seed != NrSeed::shift_add() {
            s += &format!(" seed={:.4}-{:.4}d", self.seed.c0, self.seed.c1);
        }
        s
    }
}

impl Default for TanhConfig {
    fn default() -> Self {
        Self::reference()
    }
}

/// Per-bit original-convention factors `e^(2 * 2^w)` for the published
/// variant, one register per magnitude bit at or above the threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublishedRegisters {
    /// First magnitude bit index covered by a register.
    threshold_bit: u32,
    /// Indexed by `bit - threshold_bit`.
    factors: Vec<Fx>,
    /// Accumulator format for the running product.
    product_fmt: QFormat,
}

impl PublishedRegisters {
    pub fn build(cfg: &TanhConfig) -> Result<Self> {
        cfg.validate()?;
        let mag = cfg.magnitude_fmt();
        let bits = mag.int_bits() + mag.frac_bits();
        let threshold_bit =
            (mag.frac_bits() as i64 + i64::from(cfg.published_threshold)).clamp(0, i64::from(bits)) as u32;
        let weight = |bit: u32| (f64::from(bit) - f64::from(mag.frac_bits())).exp2();

        let largest = if bits > threshold_bit {
            velocity_factor_original(weight(bits - 1))
        } else {
            1.0
        };
        let reg_fmt = QFormat::u(largest.log2().floor() as u32 + 1, cfg.lut_fmt.frac_bits());
        let factors = (threshold_bit..bits)
            .map(|b| quantize(velocity_factor_original(weight(b)), reg_fmt, RoundMode::NearestEven))
            .collect();

        // The product never exceeds e^(2 * clamp).
        let reach = clamp_threshold(cfg.output_bits()).min(mag.max_value());
        let product_int = (2.0 * reach * std::f64::consts::LOG2_E).ceil() as u32 + 1;
        let product_fmt = QFormat::new(false, product_int, cfg.mf())?;
        Ok(Self {
            threshold_bit,
            factors,
            product_fmt,
        })
    }

    pub fn threshold_bit(&self) -> u32 {
        self.threshold_bit
    }

    pub fn factors(&self) -> &[Fx] {
        &self.factors
    }

    pub fn product_fmt(&self) -> QFormat {
        self.product_fmt
    }
}

/// One LUT (or register) read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lookup {
    pub table: usize,
    pub address: usize,
    pub entry: Fx,
}

/// Every intermediate value of one evaluation, as computed by the sweep path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub input: Fx,
    pub negative: bool,
    pub magnitude: Fx,
    pub saturated: bool,
    pub lookups: Vec<Lookup>,
    pub factor: Option<Fx>,
    pub numerator: Option<Fx>,
    pub denominator: Option<Fx>,
    pub seed: Option<Fx>,
    pub iterates: Vec<Fx>,
    /// Published variant: `(f - 1) / (f + 1)` before the correction.
    pub coarse: Option<Fx>,
    /// Published variant: sum of the sub-threshold bits.
    pub residual: Option<Fx>,
    pub output: Fx,
}

impl Trace {
    fn start(input: Fx, negative: bool, magnitude: Fx, output_fmt: QFormat) -> Self {
        Self {
            input,
            negative,
            magnitude,
            saturated: false,
            lookups: Vec::new(),
            factor: None,
            numerator: None,
            denominator: None,
            seed: None,
            iterates: Vec::new(),
            coarse: None,
            residual: None,
            output: Fx::zero(output_fmt),
        }
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "input      {}", self.input)?;
        writeln!(f, "sign       {}", if self.negative { "-" } else { "+" })?;
        writeln!(f, "magnitude  {}", self.magnitude)?;
        if self.saturated {
            writeln!(f, "clamp      saturated")?;
        }
        for l in &self.lookups {
            writeln!(f, "lut{:<2} [{:#06x}] {}", l.table, l.address, l.entry)?;
        }
        let opt = |f: &mut fmt::Formatter<'_>, name: &str, v: &Option<Fx>| match v {
            Some(v) => writeln!(f, "{name:<10} {v}"),
            None => Ok(()),
        };
        opt(f, "f", &self.factor)?;
        opt(f, "coarse", &self.coarse)?;
        opt(f, "numerator", &self.numerator)?;
        opt(f, "denom/2", &self.denominator)?;
        opt(f, "seed", &self.seed)?;
        for (i, x) in self.iterates.iter().enumerate() {
            writeln!(f, "nr{:<8} {x}", i + 1)?;
        }
        opt(f, "residual", &self.residual)?;
        write!(f, "output     {}", self.output)
    }
}

/// A configured tanh unit: configuration plus its ROM contents.
#[derive(Debug, Clone)]
pub struct TanhUnit {
    cfg: TanhConfig,
    luts: Vec<VelocityLut>,
    registers: Option<PublishedRegisters>,
    clamp_code: Option<i64>,
}

impl TanhUnit {
    pub fn new(cfg: TanhConfig) -> Result<Self> {
        cfg.validate()?;
        let luts = build_luts(cfg.input_fmt, cfg.grouping, cfg.lut_fmt)?;
        Self::with_luts(cfg, luts)
    }

    /// Uses externally supplied LUTs, which must match the configuration.
    pub fn with_luts(cfg: TanhConfig, luts: Vec<VelocityLut>) -> Result<Self> {
        cfg.validate()?;
        check_luts(&cfg, &luts)?;
        let registers = match cfg.variant {
            Variant::Published => Some(PublishedRegisters::build(&cfg)?),
            Variant::Optimized => None,
        };
        Ok(Self {
            cfg,
            luts,
            registers,
            clamp_code: clamp_code(&cfg),
        })
    }

    pub fn config(&self) -> &TanhConfig {
        &self.cfg
    }

    pub fn luts(&self) -> &[VelocityLut] {
        &self.luts
    }

    pub fn registers(&self) -> Option<&PublishedRegisters> {
        self.registers.as_ref()
    }

    /// Smallest magnitude code that saturates, if any code does.
    pub fn clamp_code(&self) -> Option<i64> {
        self.clamp_code
    }

    pub fn eval(&self, x: Fx) -> Result<Fx> {
        self.run(x, None)
    }

    pub fn trace(&self, x: Fx) -> Result<Trace> {
        let (negative, magnitude) = abs_split(x)?;
        let mut trace = Trace::start(x, negative, magnitude, self.cfg.output_fmt);
        trace.output = self.run(x, Some(&mut trace))?;
        Ok(trace)
    }

    fn run(&self, x: Fx, mut trace: Option<&mut Trace>) -> Result<Fx> {
        if x.fmt() != self.cfg.input_fmt {
            return Err(Error::FormatMismatch {
                expected: self.cfg.input_fmt,
                found: x.fmt(),
            });
        }
        let (negative, mag) = abs_split(x)?;
        let out_fmt = self.cfg.output_fmt;
        let result = if self.clamp_code.is_some_and(|c| mag.code() >= c) {
            if let Some(t) = trace.as_deref_mut() {
                t.saturated = true;
            }
            Fx::max(out_fmt)
        } else {
            match self.cfg.variant {
                Variant::Optimized => {
                    let f = product(&self.cfg, &self.luts, mag, trace.as_deref_mut());
                    finish(&self.cfg, f, trace)?
                }
                Variant::Published => {
                    let regs = self.registers.as_ref().expect("published unit has registers");
                    published(&self.cfg, regs, mag, trace)?
                }
            }
        };
        Ok(if negative { result.neg() } else { result })
    }
}

/// Magnitude code at which the output saturates: the clamp threshold
/// rounded into the magnitude format, or `None` if it lies beyond it.
fn clamp_code(cfg: &TanhConfig) -> Option<i64> {
    let mag = cfg.magnitude_fmt();
    let threshold = clamp_threshold(cfg.output_bits());
    (threshold <= mag.max_value()).then(|| quantize(threshold, mag, RoundMode::NearestEven).code())
}

fn check_luts(cfg: &TanhConfig, luts: &[VelocityLut]) -> Result<()> {
    let groups = shuffle_map(cfg.input_fmt.width(), cfg.grouping)?;
    if groups.len() != luts.len() {
        return Err(Error::LutMismatch(format!(
            "expected {} LUTs, got {}",
            groups.len(),
            luts.len()
        )));
    }
    for (j, (g, lut)) in groups.iter().zip(luts).enumerate() {
        if g.as_slice() != lut.bit_indices() {
            return Err(Error::LutMismatch(format!(
                "LUT {j} covers bits {:?}, expected {g:?}",
                lut.bit_indices()
            )));
        }
        if lut.entry_fmt() != cfg.lut_fmt {
            return Err(Error::LutMismatch(format!(
                "LUT {j} entries are {}, expected {}",
                lut.entry_fmt(),
                cfg.lut_fmt
            )));
        }
    }
    Ok(())
}

/// Balanced binary multiplier tree. `None` is an exact 1.0 (bypassed input).
fn product_tree(mut level: Vec<Option<Fx>>, out: QFormat, mode: RoundMode) -> Option<Fx> {
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| match *pair {
                [Some(a), Some(b)] => Some(mul_fx(a, b, out, mode)),
                [a, None] | [None, a] => a,
                [a] => a,
                _ => unreachable!(),
            })
            .collect();
    }
    level.pop().flatten()
}

fn product(cfg: &TanhConfig, luts: &[VelocityLut], mag: Fx, trace: Option<&mut Trace>) -> Fx {
    let leaves: Vec<Option<Fx>> = luts
        .iter()
        .map(|lut| match lut.address(mag.code() as u64) {
            0 => None,
            a => Some(lut.entry(a)),
        })
        .collect();
    if let Some(t) = trace {
        t.lookups = luts
            .iter()
            .enumerate()
            .map(|(j, lut)| {
                let address = lut.address(mag.code() as u64);
                Lookup {
                    table: j,
                    address,
                    entry: lut.entry(address),
                }
            })
            .collect();
    }
    let factor_fmt = cfg.factor_fmt();
    match product_tree(leaves, cfg.mult_fmt, cfg.internal_round) {
        None => Fx::new(1 << cfg.mf(), factor_fmt).expect("1.0 fits"),
        Some(v) => requantize(v, factor_fmt, cfg.internal_round),
    }
}

/// Newton-Raphson iterates `x_1..x_stages` for `1/d`, preceded by the seed.
fn nr_iterates(d: Fx, stages: u32, cfg: &TanhConfig) -> Result<(Fx, Vec<Fx>)> {
    let dv = d.to_real();
    if !(0.5..1.0).contains(&dv) {
        return Err(Error::Domain(format!("reciprocal operand {dv} outside [0.5, 1)")));
    }
    let fmt = cfg.reciprocal_fmt();
    let mode = cfg.internal_round;
    let c0 = quantize(cfg.seed.c0, fmt, RoundMode::NearestEven);
    let c1 = quantize(cfg.seed.c1, fmt, RoundMode::NearestEven);
    let two = quantize(2.0, fmt, RoundMode::NearestEven);
    let seed = sub_fx(c0, mul_fx(c1, d, fmt, mode), fmt, mode);
    let mut x = seed;
    let iterates = (0..stages)
        .map(|_| {
            let dx = mul_fx(d, x, fmt, mode);
            x = mul_fx(x, sub_fx(two, dx, fmt, mode), fmt, mode);
            x
        })
        .collect();
    Ok((seed, iterates))
}

/// `1/d` for `d` in `[0.5, 1)` after `stages` Newton-Raphson iterations,
/// all products at the multiplier precision. The result is in
/// [`TanhConfig::reciprocal_fmt`].
pub fn nr_reciprocal(d: Fx, stages: u32, cfg: &TanhConfig) -> Result<Fx> {
    let (seed, iterates) = nr_iterates(d, stages, cfg)?;
    Ok(iterates.last().copied().unwrap_or(seed))
}

fn finish(cfg: &TanhConfig, f: Fx, trace: Option<&mut Trace>) -> Result<Fx> {
    let one = 1i64 << cfg.mf();
    let mut trace = trace;
    if let Some(t) = trace.as_deref_mut() {
        t.factor = Some(f);
    }
    if f.code() >= one {
        return Ok(Fx::zero(cfg.output_fmt));
    }
    let frac = Fx::new(f.code(), cfg.mult_fmt)?;
    let numerator = match cfg.subtractor {
        Subtractor::Twos => Fx::new(one - f.code(), cfg.factor_fmt())?,
        Subtractor::Ones => ones_complement_sub1(frac)?,
    };
    // 1 + f is a prepended integer bit; halving it moves the binary point.
    let denominator = scale_pow2(Fx::new(one | f.code(), cfg.factor_fmt())?, -1)?;
    let denominator = Fx::new(denominator.code(), cfg.denominator_fmt())?;
    if let Some(t) = trace.as_deref_mut() {
        t.numerator = Some(numerator);
        t.denominator = Some(denominator);
    }
    divide(cfg, numerator, denominator, 1, cfg.output_fmt, trace)
}

/// `numerator / (denominator * 2^shift)` with `denominator` in `[0.5, 1)`,
/// rounded nearest-even into `out`.
fn divide(
    cfg: &TanhConfig,
    numerator: Fx,
    denominator: Fx,
    shift: u32,
    out: QFormat,
    trace: Option<&mut Trace>,
) -> Result<Fx> {
    if cfg.nr_stages == 0 {
        let q = numerator.to_real() / (denominator.to_real() * f64::from(shift).exp2());
        return Ok(quantize(q, out, RoundMode::NearestEven));
    }
    let (seed, iterates) = nr_iterates(denominator, cfg.nr_stages, cfg)?;
    let reciprocal = *iterates.last().expect("at least one stage");
    if let Some(t) = trace {
        t.seed = Some(seed);
        t.iterates = iterates;
    }
    let scaled = scale_pow2(reciprocal, -(shift as i32))?;
    Ok(mul_fx(numerator, scaled, out, RoundMode::NearestEven))
}

/// Final stage of the optimized pipeline: `(1 - f) / (1 + f)` for `f` in
/// `(0, 1]` given in [`TanhConfig::factor_fmt`].
pub fn final_stage(f: Fx, cfg: &TanhConfig) -> Result<Fx> {
    if f.fmt() != cfg.factor_fmt() {
        return Err(Error::FormatMismatch {
            expected: cfg.factor_fmt(),
            found: f.fmt(),
        });
    }
    finish(cfg, f, None)
}

/// Velocity factor of an (already clamped) magnitude, in
/// [`TanhConfig::factor_fmt`]. All-zero LUT addresses contribute an exact 1.0.
pub fn velocity_product(magnitude: Fx, cfg: &TanhConfig, luts: &[VelocityLut]) -> Result<Fx> {
    cfg.validate()?;
    check_luts(cfg, luts)?;
    if magnitude.fmt() != cfg.magnitude_fmt() {
        return Err(Error::FormatMismatch {
            expected: cfg.magnitude_fmt(),
            found: magnitude.fmt(),
        });
    }
    Ok(product(cfg, luts, magnitude, None))
}

/// Evaluates the configured pipeline once. Prefer [`TanhUnit`] for repeated
/// evaluation.
pub fn tanh_fx(x: Fx, cfg: &TanhConfig, luts: &[VelocityLut]) -> Result<Fx> {
    TanhUnit::with_luts(*cfg, luts.to_vec())?.eval(x)
}

fn published(cfg: &TanhConfig, regs: &PublishedRegisters, mag: Fx, mut trace: Option<&mut Trace>) -> Result<Fx> {
    let mode = cfg.internal_round;
    let code = mag.code() as u64;
    let bits = mag.fmt().int_bits() + mag.fmt().frac_bits();
    let hits: Vec<(u32, Fx)> = (regs.threshold_bit..bits)
        .filter(|b| code >> b & 1 == 1)
        .map(|b| (b, regs.factors[(b - regs.threshold_bit) as usize]))
        .collect();
    if let Some(t) = trace.as_deref_mut() {
        t.lookups = hits
            .iter()
            .map(|&(b, entry)| Lookup {
                table: b as usize,
                address: 1,
                entry,
            })
            .collect();
    }

    let frac_fmt = cfg.mult_fmt;
    let coarse = match product_tree(hits.iter().map(|&(_, f)| Some(f)).collect(), regs.product_fmt, mode) {
        None => Fx::zero(frac_fmt),
        Some(f) => {
            let f = requantize(f, regs.product_fmt, mode);
            let one = quantize(1.0, regs.product_fmt, RoundMode::NearestEven);
            let wide = QFormat::new(false, regs.product_fmt.int_bits() + 1, cfg.mf())?;
            let numerator = sub_fx(f, one, regs.product_fmt, mode);
            let sum = add_fx(f, one, wide, mode);
            // f + 1 = normalised * 2^shift with normalised in [0.5, 1)
            let len = 64 - (sum.code() as u64).leading_zeros();
            let shift = len - cfg.mf();
            let normalised = Fx::new(sum.code(), QFormat::u(0, len))?;
            let denominator = requantize(normalised, cfg.denominator_fmt(), mode);
            if let Some(t) = trace.as_deref_mut() {
                t.factor = Some(f);
                t.numerator = Some(numerator);
                t.denominator = Some(denominator);
            }
            divide(cfg, numerator, denominator, shift, frac_fmt, trace.as_deref_mut())?
        }
    };

    let low_mask = (1u64 << regs.threshold_bit) - 1;
    let residual = Fx::new((code & low_mask) as i64, QFormat::u(0, mag.fmt().frac_bits()))?;
    let one = quantize(1.0, cfg.factor_fmt(), RoundMode::NearestEven);
    let t2 = mul_fx(coarse, coarse, frac_fmt, mode);
    let slope = sub_fx(one, t2, cfg.factor_fmt(), mode);
    let correction = mul_fx(residual, slope, frac_fmt, mode);
    if let Some(t) = trace {
        t.coarse = Some(coarse);
        t.residual = Some(residual);
    }
    Ok(add_fx(coarse, correction, cfg.output_fmt, RoundMode::NearestEven))
}

/// Published-method evaluation with explicit registers.
pub fn tanh_published(x: Fx, cfg: &TanhConfig, registers: &PublishedRegisters) -> Result<Fx> {
    let cfg = TanhConfig {
        variant: Variant::Published,
        ..*cfg
    };
    cfg.validate()?;
    TanhUnit {
        cfg,
        luts: Vec::new(),
        registers: Some(registers.clone()),
        clamp_code: clamp_code(&cfg),
    }
    .eval(x)
}
