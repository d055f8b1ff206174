//! Stability boundaries of the three-ion crystal in the `(α, δα)` plane.
//!
//! Sign conventions of the residuals, calibrated against the Hessian:
//! `zzy_boundary_residual > 0` where the y-oriented zigzag is stable, and
//! `outer_excited_linear_boundary_residual > 0` where the linear chain with
//! an excited outer ion is stable (valid above the upper pole).

mod scan;
mod svg;

use crate::crystal::zigzag_y_closed_form;
use crate::error::{Error, Result};

pub use scan::{
    bisect, homogeneous_critical_alpha, scan_diagram, BoundaryCurve, CellRecord, CurveSource, ScanSettings,
    StabilityDiagram,
};
pub use svg::render_svg;

/// `α_c = sqrt(12/5)`, the homogeneous linear/zigzag transition.
pub fn homogeneous_alpha_c() -> f64 {
    2.4f64.sqrt()
}

/// Critical shift `δα_c = (2 sqrt(2 / (5α² - 4)) - 1) α`; the linear chain
/// with its middle ion excited is stable for `δα > δα_c`.
pub fn delta_alpha_critical(alpha: f64) -> Result<f64> {
    let d = 5.0 * alpha * alpha - 4.0;
    if !(d > 0.0) {
        return Err(Error::Domain(format!("5 alpha^2 - 4 must be positive, got {d}")));
    }
    Ok((2.0 * (2.0 / d).sqrt() - 1.0) * alpha)
}

fn zzy_rhs(alpha: f64) -> Result<f64> {
    let (xb, yb) = zigzag_y_closed_form(alpha)?;
    let d = 3f64.cbrt();
    let u = (yb / d).powi(2);
    let denom = 2.0 - alpha * alpha - u;
    if denom == 0.0 {
        return Err(Error::Pole(alpha));
    }
    Ok(-u + 1.0 / 3.0 + (3.0 * xb * yb).powi(2) / (d.powi(4) * denom))
}

/// Left minus right side of the vanishing-determinant condition of the
/// y-oriented zigzag whose apex ion is excited.
pub fn zzy_boundary_residual(alpha: f64, delta_alpha: f64) -> Result<f64> {
    let r = ratio(alpha, delta_alpha)?;
    Ok(alpha * alpha / (2.0 * r + 1.0) - zzy_rhs(alpha)?)
}

/// Root of [`zzy_boundary_residual`] in `δα` at fixed `α`, if any.
pub fn zzy_boundary_delta_alpha(alpha: f64) -> Result<Option<f64>> {
    let z = zzy_rhs(alpha)?;
    if !(z > 0.0) {
        return Ok(None);
    }
    let r = (alpha * alpha / z - 1.0) / 2.0;
    if !(r > 0.0) {
        return Ok(None);
    }
    Ok(Some(alpha / r.sqrt() - alpha))
}

/// The two values of `α` where `5α⁴ - 25α²/2 + 4` vanishes, ascending.
pub fn outer_excited_poles() -> [f64; 2] {
    let disc = (625.0f64 / 4.0 - 80.0).sqrt();
    [((12.5 - disc) / 10.0).sqrt(), ((12.5 + disc) / 10.0).sqrt()]
}

fn outer_rhs(alpha: f64) -> Result<f64> {
    let a2 = alpha * alpha;
    let denom = 5.0 * (5.0 * a2 * a2 - 12.5 * a2 + 4.0);
    if denom.abs() < 1e-12 {
        return Err(Error::Pole(alpha));
    }
    Ok(0.45 + (65.0 / 8.0 * a2 - 9.0) / denom)
}

/// Left minus right side of the stability condition of the linear chain
/// with one outer ion excited.
pub fn outer_excited_linear_boundary_residual(alpha: f64, delta_alpha: f64) -> Result<f64> {
    let r = ratio(alpha, delta_alpha)?;
    Ok(alpha * alpha / (2.0 * r) - outer_rhs(alpha)?)
}

/// Root of [`outer_excited_linear_boundary_residual`] in `δα`, if any.
pub fn outer_excited_linear_boundary_delta_alpha(alpha: f64) -> Result<Option<f64>> {
    let t = outer_rhs(alpha)?;
    if !(t > 0.0) {
        return Ok(None);
    }
    Ok(Some((2.0 * t).sqrt() - alpha))
}

fn ratio(alpha: f64, delta_alpha: f64) -> Result<f64> {
    let ae = alpha + delta_alpha;
    if !(ae > 0.0) {
        return Err(Error::Domain(format!("alpha + delta_alpha must be positive, got {ae}")));
    }
    Ok(alpha * alpha / (ae * ae))
}
