//! Bit-accurate software model of a fixed-point hyperbolic tangent unit
//! built on velocity factors.
//!
//! `tanh(a + b)` does not factor, but the velocity factor
//! `f(a) = (1 - tanh a) / (1 + tanh a)` does: `f(a + b) = f(a) f(b)`. The
//! unit looks up the factors of groups of input bits in small ROMs,
//! multiplies them, and recovers `tanh = (1 - f) / (1 + f)` with a
//! Newton-Raphson reciprocal.
//!
//! * [`fxnum`]: fixed-point formats and width-controlled arithmetic.
//! * [`lutgen`]: velocity-factor math, LUT grouping and ROM images.
//! * [`datapath`]: the optimized and the published pipelines.
//! * [`baselines`]: reference tanh, PWL and Taylor approximations.
//! * [`analysis`]: exhaustive error sweeps and report rendering.

pub mod analysis;
pub mod baselines;
pub mod datapath;
pub mod error;
pub mod fxnum;
pub mod lutgen;

pub use analysis::{
    clamp_threshold, compare_methods, exhaustive_sweep, table2, ErrorReport, MethodComparison, Table2Row,
};
pub use baselines::{pwl_tanh, reference_tanh, taylor_tanh, PwlTable};
pub use datapath::{
    final_stage, nr_reciprocal, tanh_fx, tanh_published, velocity_product, NrSeed, PublishedRegisters, Subtractor,
    TanhConfig, TanhUnit, Trace, Variant,
};
pub use error::{Error, Result};
pub use fxnum::{Fx, QFormat, RoundMode};
pub use lutgen::{build_luts, export_memh, shuffle_map, GroupingScheme, VelocityLut};
