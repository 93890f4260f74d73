//! `vftanh`: LUT generation, error sweeps and single-input traces for the
//! velocity-factor tanh datapath.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vftanh::analysis::{compare_methods, exhaustive_sweep_jobs, render_csv, render_table2, render_text, table2_jobs};
use vftanh::fxnum::quantize;
use vftanh::lutgen::write_rom_images;
use vftanh::{
    build_luts, clamp_threshold, GroupingScheme, NrSeed, PwlTable, QFormat, RoundMode, Subtractor, TanhConfig,
    TanhUnit, Variant,
};

#[derive(Parser, Debug)]
#[command(name = "vftanh", version, about = "Velocity-factor tanh datapath model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write one lut<j>.memh per LUT plus manifest.txt.
    GenLut {
        #[command(flatten)]
        lut: LutArgs,
        /// Output directory, created if missing.
        #[arg(long)]
        dir: PathBuf,
    },
    /// Exhaustive error sweep of one configuration.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Sweep every NR stage count (0 = real divider, 2, 3) with both subtractors.
    Table2 {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Optimized and published units against PWL and Taylor baselines.
    Compare {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        report: ReportArgs,
        /// PWL knot spacing over the clamp range.
        #[arg(long, default_value_t = 0.25)]
        pwl_spacing: f64,
        /// Odd-power Taylor terms.
        #[arg(long, default_value_t = 3)]
        taylor_terms: usize,
    },
    /// Trace one input through the datapath, e.g. `eval x=0.75`.
    Eval {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// `x=<value>` or `<value>`; rounded to the nearest input code.
        #[arg(allow_negative_numbers = true)]
        x: String,
    },
}

#[derive(Args, Debug, Clone)]
struct LutArgs {
    /// Input format.
    #[arg(long = "in", value_parser = parse_format, default_value = "s3.12")]
    input: QFormat,
    /// Fraction bits of each LUT entry (u0.N).
    #[arg(long, default_value_t = 18)]
    lut_bits: u32,
    /// Input bits per LUT address.
    #[arg(long, default_value_t = 4)]
    group: u32,
    /// Boustrophedon bit shuffling across LUTs.
    #[arg(long, overrides_with = "no_shuffle", default_value_t = true)]
    shuffle: bool,
    /// Consecutive bit groups.
    #[arg(long, overrides_with = "shuffle")]
    no_shuffle: bool,
}

impl LutArgs {
    fn grouping(&self) -> vftanh::Result<GroupingScheme> {
        GroupingScheme::new(self.group, self.shuffle && !self.no_shuffle)
    }

    fn lut_fmt(&self) -> vftanh::Result<QFormat> {
        QFormat::new(false, 0, self.lut_bits)
    }
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    #[command(flatten)]
    lut: LutArgs,
    /// Output format.
    #[arg(long = "out", value_parser = parse_format, default_value = "s.15")]
    output: QFormat,
    /// Fraction bits of every internal product (u0.N).
    #[arg(long, default_value_t = 16)]
    mult_bits: u32,
    /// Newton-Raphson stages; 0 divides in real arithmetic.
    #[arg(long, default_value_t = 3)]
    nr_stages: u32,
    #[arg(long, value_enum, default_value_t = SubArg::Twos)]
    sub: SubArg,
    #[arg(long, value_enum, default_value_t = VariantArg::Optimized)]
    variant: VariantArg,
    /// Published variant: exponent of the smallest weight kept in the product.
    #[arg(long, default_value_t = -7, allow_negative_numbers = true)]
    threshold: i32,
    /// Rounding of internal multipliers.
    #[arg(long, value_enum, default_value_t = RoundArg::Nearest)]
    round: RoundArg,
    /// NR starting value.
    #[arg(long, value_enum, default_value_t = SeedArg::ShiftAdd)]
    seed: SeedArg,
    /// Sweep worker threads (default: all cores).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
}

impl ConfigArgs {
    fn config(&self) -> vftanh::Result<TanhConfig> {
        let cfg = TanhConfig {
            input_fmt: self.lut.input,
            output_fmt: self.output,
            lut_fmt: self.lut.lut_fmt()?,
            mult_fmt: QFormat::new(false, 0, self.mult_bits)?,
            grouping: self.lut.grouping()?,
            nr_stages: self.nr_stages,
            subtractor: match self.sub {
                SubArg::Ones => Subtractor::Ones,
                SubArg::Twos => Subtractor::Twos,
            },
            variant: match self.variant {
                VariantArg::Optimized => Variant::Optimized,
                VariantArg::Published => Variant::Published,
            },
            published_threshold: self.threshold,
            internal_round: match self.round {
                RoundArg::Nearest => RoundMode::NearestEven,
                RoundArg::Truncate => RoundMode::Truncate,
            },
            seed: match self.seed {
                SeedArg::ShiftAdd => NrSeed::shift_add(),
                SeedArg::Minimax => NrSeed::minimax(),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn jobs(&self) -> Option<usize> {
        self.jobs.map(|j| j as usize)
    }
}

#[derive(Args, Debug, Clone)]
struct ReportArgs {
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    /// Write the report here instead of stdout.
    #[arg(long, short = 'o')]
    output_file: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SubArg {
    Ones,
    Twos,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum VariantArg {
    Optimized,
    Published,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum RoundArg {
    Nearest,
    Truncate,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SeedArg {
    ShiftAdd,
    Minimax,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ReportFormat {
    Text,
    Csv,
}

fn parse_format(text: &str) -> Result<QFormat, String> {
    text.parse().map_err(|e: vftanh::Error| e.to_string())
}

fn parse_input(text: &str, fmt: QFormat) -> Result<vftanh::Fx, String> {
    let value = text.strip_prefix("x=").unwrap_or(text);
    let x: f64 = value.parse().map_err(|_| format!("invalid input value '{value}'"))?;
    let half = fmt.ulp() / 2.0;
    if !(x >= fmt.min_value() - half && x < fmt.max_value() + half) {
        return Err(format!("{x} is outside the range of {fmt}"));
    }
    Ok(quantize(x, fmt, RoundMode::NearestEven))
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn run(cli: Cli) -> Result<(), String> {
    let err = |e: vftanh::Error| e.to_string();
    match cli.command {
        Command::GenLut { lut, dir } => {
            let luts = build_luts(lut.input, lut.grouping().map_err(err)?, lut.lut_fmt().map_err(err)?).map_err(err)?;
            fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            let written = write_rom_images(&dir, &luts).map_err(err)?;
            let listing: String = written.iter().map(|p| format!("{}\n", p.display())).collect();
            emit(&listing, None)
        }
        Command::Sweep { cfg, report } => {
            let c = cfg.config().map_err(err)?;
            let r = exhaustive_sweep_jobs(&c, cfg.jobs()).map_err(err)?;
            let text = match report.format {
                ReportFormat::Text => render_text([&r]),
                ReportFormat::Csv => render_csv([&r]).map_err(err)?,
            };
            emit(&text, report.output_file.as_deref())
        }
        Command::Table2 { cfg, report } => {
            let c = cfg.config().map_err(err)?;
            let rows = table2_jobs(&c, cfg.jobs()).map_err(err)?;
            let text = match report.format {
                ReportFormat::Text => render_table2(&rows),
                ReportFormat::Csv => render_csv(rows.iter().map(|r| &r.report)).map_err(err)?,
            };
            emit(&text, report.output_file.as_deref())
        }
        Command::Compare {
            cfg,
            report,
            pwl_spacing,
            taylor_terms,
        } => {
            let c = cfg.config().map_err(err)?;
            let end = clamp_threshold(c.output_bits()).min(c.input_fmt.max_value());
            let pwl = PwlTable::uniform(pwl_spacing, end).map_err(err)?;
            let cmp = compare_methods(&c, &pwl, taylor_terms, cfg.jobs()).map_err(err)?;
            let text = match report.format {
                ReportFormat::Text => render_text(cmp.reports()),
                ReportFormat::Csv => render_csv(cmp.reports()).map_err(err)?,
            };
            emit(&text, report.output_file.as_deref())
        }
        Command::Eval { cfg, x } => {
            let c = cfg.config().map_err(err)?;
            let x = parse_input(&x, c.input_fmt)?;
            let trace = TanhUnit::new(c).and_then(|u| u.trace(x)).map_err(err)?;
            emit(&format!("{}\n{trace}\n", c.summary()), None)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version also land here, with exit code 0
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
