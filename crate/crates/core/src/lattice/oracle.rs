//! Brute-force evaluation of the integral fractional Laplacian
//!
//! ```text
//! (-Δ)^s u(x) = c_{1,s} P.V. ∫ (u(x) - u(y)) / |x - y|^{1+2s} dy
//! ```
//!
//! for a function `u` that vanishes outside a known interval `[a, b]` and is
//! smooth inside it. This is independent of the lattice discretization and
//! is what the discrete operator is checked against.

use super::operator::normalization_constant;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

const ABS_TOL: f64 = 1e-11;
const REL_TOL: f64 = 1e-11;
const MAX_SEGMENTS: usize = 20_000;

/// Fraction of the inner radius below which the Taylor-subtracted integrand
/// is replaced by zero (its true size there is `O(z^{3-2s})`).
const CANCELLATION_FLOOR: f64 = 1e-3;

fn second_derivative<F: Fn(f64) -> f64>(u: &F, x: f64, step: f64) -> f64 {
    // fourth-order central difference
    let h = step;
    (-u(x + 2.0 * h) + 16.0 * u(x + h) - 30.0 * u(x) + 16.0 * u(x - h) - u(x - 2.0 * h))
        / (12.0 * h * h)
}

/// Evaluates `(-Δ)^s u(x)` for `u` supported in `support = [a, b]`.
///
/// Inside the support the P.V. integral is split at `|y - x| = r₀`; the inner
/// part uses the symmetric second difference with the `u''(x) z²` term
/// subtracted (and integrated in closed form), the outer part is adaptive
/// quadrature over what remains of the support plus the closed-form tail of
/// `u(x)/|z|^{1+2s}`. Outside the support no principal value is needed.
pub fn oracle_fraclap<F>(u: F, support: (f64, f64), x: f64, s: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Order(s));
    }
    let (a, b) = support;
    if !(a < b) {
        return Err(Error::InvalidArgument(format!(
            "empty support [{a}, {b}]"
        )));
    }
    let c = normalization_constant(s);
    let p = 1.0 + 2.0 * s;
    let u_in = |y: f64| if y > a && y < b { u(y) } else { 0.0 };

    if x == a || x == b {
        return Err(Error::InvalidArgument(format!(
            "x = {x} lies on the support boundary"
        )));
    }
    if x < a || x > b {
        let far = integrate(
            |y| u_in(y) / (x - y).abs().powf(p),
            a,
            b,
            ABS_TOL,
            REL_TOL,
            MAX_SEGMENTS,
        )?;
        return Ok(-c * far.value);
    }

    let r0 = 0.5 * (x - a).min(b - x).min(1.0);
    let ux = u_in(x);
    let d2 = second_derivative(&u_in, x, 0.05 * r0);
    let z_floor = CANCELLATION_FLOOR * r0;

    let inner = integrate(
        |z| {
            if z < z_floor {
                0.0
            } else {
                (2.0 * ux - u_in(x + z) - u_in(x - z) + d2 * z * z) / z.powf(p)
            }
        },
        0.0,
        r0,
        ABS_TOL,
        REL_TOL,
        MAX_SEGMENTS,
    )?;
    let inner_value = inner.value - d2 * r0.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);

    let kernel = |y: f64| u_in(y) / (x - y).abs().powf(p);
    let left = integrate(kernel, a, x - r0, ABS_TOL, REL_TOL, MAX_SEGMENTS)?;
    let right = integrate(kernel, x + r0, b, ABS_TOL, REL_TOL, MAX_SEGMENTS)?;
    let outer_value = ux * r0.powf(-2.0 * s) / s - left.value - right.value;

    Ok(c * (inner_value + outer_value))
}
