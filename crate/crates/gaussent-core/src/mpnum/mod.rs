//! Arbitrary-precision dense real linear algebra kernel.
//!
//! Every numerical module in this crate works through the [`Matrix`] type and
//! the eigen/pinv/norm routines defined here, all parameterized by a
//! [`PrecisionContext`]. Separability flows in particular need several
//! hundred decimal digits to stay stable, so everything is built on MPFR
//! floats rather than f64.

mod context;
mod eigen;
mod geneig;
mod matrix;

pub use context::PrecisionContext;
pub use eigen::{is_psd, op_norm, pinv, sqrt_psd, sym_eig};
pub use geneig::gen_eig;
pub use matrix::Matrix;

use rug::Float;

/// Format an arbitrary-precision value as a decimal string with `digits`
/// significant digits, in a form that parses back losslessly at the same
/// working precision.
pub fn dec_str(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let (sign, mantissa, exp) = x.to_sign_string_exp(10, Some(digits));
    let s = if sign { "-" } else { "" };
    let exp = exp.unwrap_or(0);
    // to_sign_string_exp returns mantissa "ddd..." with value 0.ddd * 10^exp
    let m = mantissa.trim_end_matches('0');
    let m = if m.is_empty() { "0" } else { m };
    if m == "0" {
        return "0".to_string();
    }
    // render as d.ddd e (exp-1)
    let e10 = exp - 1;
    let head = &m[..1];
    let tail = &m[1..];
    let mut out = String::with_capacity(m.len() + 8);
    out.push_str(s);
    out.push_str(head);
    if !tail.is_empty() {
        out.push('.');
        out.push_str(tail);
    }
    if e10 != 0 {
        out.push('e');
        out.push_str(&e10.to_string());
    }
    out
}
