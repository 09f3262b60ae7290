//! l^p-type norms: the Lorentzian `|v|^p`, the time separation `tau^p` built
//! from it, the Riemannian l^p distance, and the parallelogram defect.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Event, Exponent, SpaceDescriptor};

/// A vector `(v0, v1)` of R^{1,1}; `v0` is the time component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzVector {
    pub v0: f64,
    pub v1: f64,
}

impl LorentzVector {
    pub const fn new(v0: f64, v1: f64) -> Self {
        LorentzVector { v0, v1 }
    }

    pub fn scaled(self, lambda: f64) -> Self {
        LorentzVector::new(lambda * self.v0, lambda * self.v1)
    }

    /// Strictly inside the future cone: `v0 > |v1|`.
    pub fn is_future_timelike(self) -> bool {
        self.v0 > self.v1.abs()
    }
}

impl std::ops::Add for LorentzVector {
    type Output = LorentzVector;
    fn add(self, o: LorentzVector) -> LorentzVector {
        LorentzVector::new(self.v0 + o.v0, self.v1 + o.v1)
    }
}

impl std::ops::Sub for LorentzVector {
    type Output = LorentzVector;
    fn sub(self, o: LorentzVector) -> LorentzVector {
        LorentzVector::new(self.v0 - o.v0, self.v1 - o.v1)
    }
}

/// `|v|^p = (|v0|^p - |v1|^p)^(1/p)` on the closed future cone, `0` elsewhere.
///
/// Evaluated as `v0 * (1 - r^p)^(1/p)` with `r = |v1| / v0`, where `1 - r^p`
/// comes from `expm1(p ln r)`. This keeps full relative accuracy close to the
/// null cone and for large `p`, and never overflows.
pub fn lp_lorentz_norm(v: LorentzVector, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent p must be in [1, inf), got {p}")));
    }
    Ok(lorentz_norm_unchecked(v.v0, v.v1.abs(), p))
}

fn lorentz_norm_unchecked(v0: f64, a1: f64, p: f64) -> f64 {
    if v0 <= 0.0 || a1 >= v0 {
        return 0.0;
    }
    if a1 == 0.0 {
        return v0;
    }
    let r = a1 / v0;
    let gap = -(p * r.ln()).exp_m1();
    v0 * (gap.ln() / p).exp()
}

/// `tau^inf` on a displacement: `dt` if `dt > |dx|`, else `0`.
fn tau_infinity_components(dt: f64, adx: f64) -> f64 {
    if dt > adx {
        dt
    } else {
        0.0
    }
}

/// `|v|^p` for any exponent, `p = inf` being the pointwise limit.
pub fn lorentz_norm(v: LorentzVector, p: Exponent) -> f64 {
    match p {
        Exponent::Finite(p) => lorentz_norm_unchecked(v.v0, v.v1.abs(), p),
        Exponent::Infinite => tau_infinity_components(v.v0, v.v1.abs()),
    }
}

/// Time separation `tau^p(a, b) = |b - a|^p` on the plane or the cylinder.
///
/// On the cylinder the spatial difference is the lift-minimal one.
pub fn tau(a: &Event, b: &Event, space: &SpaceDescriptor) -> Result<f64> {
    let p = match *space {
        SpaceDescriptor::LorentzPlane { p } | SpaceDescriptor::LorentzCylinder { p, .. } => p,
        _ => {
            return Err(Error::ChartMismatch(
                "tau^p is only defined on the Lorentzian plane and cylinder".to_string(),
            ))
        }
    };
    let (dt, dx) = space.displacement(a, b)?;
    Ok(lorentz_norm(LorentzVector::new(dt, dx), p))
}

/// `tau^inf(a, b)`, regardless of the exponent stored in `space`.
///
/// Lower semicontinuous: the timelike branch uses the strict inequality.
pub fn tau_infinity(a: &Event, b: &Event, space: &SpaceDescriptor) -> Result<f64> {
    if !space.is_lorentzian() {
        return Err(Error::ChartMismatch("tau^inf needs a Lorentzian space".to_string()));
    }
    let (dt, dx) = space.displacement(a, b)?;
    Ok(tau_infinity_components(dt, dx))
}

/// Antisymmetric version `tau(a, b) - tau(b, a)`.
pub fn signed_tau(a: &Event, b: &Event, space: &SpaceDescriptor) -> Result<f64> {
    Ok(tau(a, b, space)? - tau(b, a, space)?)
}

/// The l^p norm of `(v0, v1)` on R^2.
pub fn lp_norm(v: LorentzVector, p: Exponent) -> f64 {
    let (a, b) = (v.v0.abs(), v.v1.abs());
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    match p {
        Exponent::Infinite => hi,
        Exponent::Finite(_) if hi == 0.0 => 0.0,
        Exponent::Finite(p) => {
            let r = lo / hi;
            hi * ((p * r.ln()).exp().ln_1p() / p).exp()
        }
    }
}

/// Distance `|b - a|` in `(R^2, l^p)`.
pub fn lp_plane_distance(a: &Event, b: &Event, p: Exponent) -> f64 {
    lp_norm(LorentzVector::new(b.t() - a.t(), b.x() - a.x()), p)
}

/// Which norm the parallelogram defect is evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NormMode {
    Lorentz,
    Riemann,
}

/// `E = 2|x|^2 + 2|y|^2 - |x+y|^2 - |x-y|^2`.
///
/// Zero for `p = 2`. In Lorentzian mode `x`, `y`, `x+y` and `x-y` must all
/// lie strictly inside the future cone; otherwise the function errors rather
/// than reporting the meaningless value.
pub fn parallelogram_defect(
    x: LorentzVector,
    y: LorentzVector,
    p: Exponent,
    mode: NormMode,
) -> Result<f64> {
    let norm = |v: LorentzVector| match mode {
        NormMode::Lorentz => lorentz_norm(v, p),
        NormMode::Riemann => lp_norm(v, p),
    };
    if mode == NormMode::Lorentz {
        for (name, v) in [("x", x), ("y", y), ("x+y", x + y), ("x-y", x - y)] {
            if !v.is_future_timelike() {
                return Err(Error::Precondition(format!(
                    "{name} = ({}, {}) is not chronologically after 0",
                    v.v0, v.v1
                )));
            }
        }
    }
    if mode == NormMode::Lorentz {
        // |v|^2 = v0^2 + excess(v) and the v0^2 terms cancel exactly, which
        // keeps the tiny defects of large p accurate
        let excess = |v: LorentzVector| square_excess(v.v0, v.v1.abs(), p);
        return Ok(2.0 * excess(x) + 2.0 * excess(y) - excess(x + y) - excess(x - y));
    }
    let (nx, ny, ns, nd) = (norm(x), norm(y), norm(x + y), norm(x - y));
    Ok(2.0 * nx * nx + 2.0 * ny * ny - ns * ns - nd * nd)
}

/// `|v|^2 - v0^2` for a future timelike `v`, as `v0^2 expm1((2/p) ln(1 - r^p))`.
fn square_excess(v0: f64, a1: f64, p: Exponent) -> f64 {
    match p {
        Exponent::Infinite => 0.0,
        _ if a1 == 0.0 => 0.0,
        Exponent::Finite(1.0) => a1 * (a1 - 2.0 * v0),
        Exponent::Finite(2.0) => -a1 * a1,
        Exponent::Finite(p) => {
            let gap = -(p * (a1 / v0).ln()).exp_m1();
            v0 * v0 * (2.0 * gap.ln() / p).exp_m1()
        }
    }
}
