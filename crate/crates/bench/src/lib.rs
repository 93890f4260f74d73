//! Shared inputs for the criterion benches.

use vftanh::{Fx, QFormat};

/// Every `step`-th code of `fmt`, ascending.
pub fn strided_inputs(fmt: QFormat, step: usize) -> Vec<Fx> {
    fmt.codes()
        .step_by(step)
        .map(|c| Fx::new(c, fmt).expect("code from the format's own range"))
        .collect()
}
