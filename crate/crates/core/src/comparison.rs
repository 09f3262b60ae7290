//! Constant-curvature comparison geometry.
//!
//! Spherical comparison triangles with explicit ambient coordinates, the
//! closed-form comparison median for every sign of `k`, its small-scale
//! expansion, and the flat Lorentzian comparison median.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance below zero accepted for the z-radicand of the third vertex.
const RADICAND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Signature {
    Riemann,
    Lorentz,
}

/// Side data of a triangle `abc`.
///
/// For the Lorentzian signature the triangle is timelike, `a << b << c`, with
/// `ab = tau(a, b)`, `bc = tau(b, c)`, `ac = tau(a, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleSides {
    pub ab: f64,
    pub ac: f64,
    pub bc: f64,
    pub signature: Signature,
}

impl TriangleSides {
    pub fn riemann(ab: f64, ac: f64, bc: f64) -> Result<Self> {
        let s = TriangleSides { ab, ac, bc, signature: Signature::Riemann };
        s.validate()?;
        Ok(s)
    }

    pub fn lorentz(ab: f64, bc: f64, ac: f64) -> Result<Self> {
        let s = TriangleSides { ab, ac, bc, signature: Signature::Lorentz };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let TriangleSides { ab, ac, bc, signature } = *self;
        if ![ab, ac, bc].iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sides must be finite and non-negative, got ({ab}, {ac}, {bc})"
            )));
        }
        let slack = 1e-12 * (ab + ac + bc);
        match signature {
            Signature::Riemann => {
                if ab > ac + bc + slack || ac > ab + bc + slack || bc > ab + ac + slack {
                    return Err(Error::InvalidParameter(format!(
                        "sides ({ab}, {ac}, {bc}) violate the triangle inequality"
                    )));
                }
            }
            Signature::Lorentz => {
                if ac < ab + bc - slack {
                    return Err(Error::Precondition(format!(
                        "not a valid timelike triangle: ac = {ac} < ab + bc = {}",
                        ab + bc
                    )));
                }
            }
        }
        Ok(())
    }

    /// All three sides multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        TriangleSides {
            ab: lambda * self.ab,
            ac: lambda * self.ac,
            bc: lambda * self.bc,
            signature: self.signature,
        }
    }

    /// Flat median `sqrt(2ab^2 + 2ac^2 - bc^2) / 2` from `a` to the midpoint of `bc`.
    pub fn flat_median(&self) -> f64 {
        let q = 2.0 * self.ab * self.ab + 2.0 * self.ac * self.ac - self.bc * self.bc;
        0.5 * q.max(0.0).sqrt()
    }
}

/// Points of R^3.
pub type Vec3 = [f64; 3];

/// Vertices of a comparison triangle on the sphere of radius `1/sqrt(k)`,
/// plus the comparison point of the midpoint of `bc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonPoints {
    pub a_bar: Vec3,
    pub b_bar: Vec3,
    pub c_bar: Vec3,
    pub m_bar: Vec3,
}

/// Which of the two mirror-image solutions to place `c_bar` on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Hemisphere {
    #[default]
    Upper,
    Lower,
}

/// Comparison triangle on `(1/sqrt(k)) S^2`.
///
/// `a_bar = (1, 0, 0) / sqrt(k)`, `b_bar` rotated by `ab` in the xy-plane, and
/// `c_bar = (cos(ac), Y, +-sqrt(1 - Y^2 - cos^2(ac))) / sqrt(k)` with
/// `Y = cos(bc)/sin(ab) - cos(ac)/tan(ab)` (angles scaled by `sqrt(k)`).
/// `Y` and the radicand are evaluated in a cancellation-free product form so
/// that small triangles keep full relative accuracy.
pub fn sphere_comparison_triangle(sides: &TriangleSides, k: f64) -> Result<ComparisonPoints> {
    sphere_comparison_triangle_on(sides, k, Hemisphere::Upper)
}

pub fn sphere_comparison_triangle_on(
    sides: &TriangleSides,
    k: f64,
    hemisphere: Hemisphere,
) -> Result<ComparisonPoints> {
    require_riemann(sides)?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("sphere curvature must be > 0, got {k}")));
    }
    if sides.ab == 0.0 {
        return Err(Error::Degenerate("side ab = 0 leaves the triangle plane undefined".into()));
    }
    let sk = k.sqrt();
    let r = 1.0 / sk;
    let (a, b, c) = (sides.ab * sk, sides.ac * sk, sides.bc * sk);
    let sin_a = a.sin();
    if sin_a.abs() < 1e-300 || a >= std::f64::consts::PI {
        return Err(Error::TriangleTooLarge {
            k,
            detail: format!("ab * sqrt(k) = {a} leaves no unique great circle"),
        });
    }
    // sin(ac) - Y = (cos(ab - ac) - cos(bc)) / sin(ab)
    let w = 2.0 * ((c + a - b) / 2.0).sin() * ((c - a + b) / 2.0).sin() / sin_a;
    let sin_b = b.sin();
    let y = sin_b - w;
    let radicand = w * (2.0 * sin_b - w);
    if radicand < -RADICAND_TOL {
        return Err(Error::TriangleTooLarge {
            k,
            detail: format!("third-vertex radicand {radicand} is negative"),
        });
    }
    let z = radicand.max(0.0).sqrt();
    let z = match hemisphere {
        Hemisphere::Upper => z,
        Hemisphere::Lower => -z,
    };
    let a_bar = [r, 0.0, 0.0];
    let b_bar = [r * a.cos(), r * sin_a, 0.0];
    let c_bar = [r * b.cos(), r * y, r * z];
    let mid = [b_bar[0] + c_bar[0], b_bar[1] + c_bar[1], b_bar[2] + c_bar[2]];
    let len = norm3(mid);
    if len == 0.0 {
        return Err(Error::Degenerate("b_bar and c_bar are antipodal".into()));
    }
    let m_bar = [r * mid[0] / len, r * mid[1] / len, r * mid[2] / len];
    Ok(ComparisonPoints { a_bar, b_bar, c_bar, m_bar })
}

pub(crate) fn norm3(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Intrinsic distance between two points of the sphere of radius `1/sqrt(k)`,
/// computed from the angle via `atan2(|p x q|, p . q)`.
pub fn sphere_distance(p: Vec3, q: Vec3, k: f64) -> f64 {
    let cross = [
        p[1] * q[2] - p[2] * q[1],
        p[2] * q[0] - p[0] * q[2],
        p[0] * q[1] - p[1] * q[0],
    ];
    let dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    norm3(cross).atan2(dot) / k.sqrt()
}

fn require_riemann(sides: &TriangleSides) -> Result<()> {
    if sides.signature != Signature::Riemann {
        return Err(Error::Precondition("expected a Riemannian triangle".into()));
    }
    sides.validate()
}

/// Distance from `a_bar` to the midpoint of `b_bar c_bar` in the model
/// space of constant curvature `k`.
///
/// `k > 0`: `arccos((cos ab + cos ac) / (2 cos(bc/2))) / sqrt(k)`;
/// `k = 0`: `sqrt(2ab^2 + 2ac^2 - bc^2) / 2`;
/// `k < 0`: the same with `cosh`, i.e. the analytic continuation.
///
/// The `k != 0` cases are evaluated through half-angle identities, e.g.
/// `1 - cos m = (2 sin^2(ab/2) + 2 sin^2(ac/2) - 4 sin^2(bc/4)) / (2 cos(bc/2))`,
/// which avoids the loss of all significant digits for small triangles.
pub fn comparison_median(sides: &TriangleSides, k: f64) -> Result<f64> {
    require_riemann(sides)?;
    comparison_median_unchecked(sides, k)
}

/// The closed form of [`comparison_median`] without the triangle checks.
pub(crate) fn comparison_median_unchecked(sides: &TriangleSides, k: f64) -> Result<f64> {
    if !k.is_finite() {
        return Err(Error::InvalidParameter(format!("curvature must be finite, got {k}")));
    }
    if k == 0.0 {
        return Ok(sides.flat_median());
    }
    let sk = k.abs().sqrt();
    let (a, b, c) = (sides.ab * sk, sides.ac * sk, sides.bc * sk);
    if k > 0.0 {
        let half_c = (c / 2.0).cos();
        let sq = |v: f64| v * v;
        let num = 2.0 * sq((a / 2.0).sin()) + 2.0 * sq((b / 2.0).sin()) - 4.0 * sq((c / 4.0).sin());
        if half_c <= 0.0 {
            return Err(Error::Domain(format!("cos(bc sqrt(k) / 2) = {half_c} <= 0")));
        }
        // q = 1 - cos(m); the arccos argument is 1 - q
        let q = num / (2.0 * half_c);
        if !(-1e-12..=2.0 + 1e-12).contains(&q) {
            return Err(Error::Domain(format!("arccos argument {} outside [-1, 1]", 1.0 - q)));
        }
        let q = q.clamp(0.0, 2.0);
        Ok(2.0 * (q / 2.0).sqrt().min(1.0).asin() / sk)
    } else {
        let half_c = (c / 2.0).cosh();
        let sq = |v: f64| v * v;
        let num =
            2.0 * sq((a / 2.0).sinh()) + 2.0 * sq((b / 2.0).sinh()) - 4.0 * sq((c / 4.0).sinh());
        // q = cosh(m) - 1
        let q = num / (2.0 * half_c);
        if q < -1e-12 {
            return Err(Error::Domain(format!("arccosh argument {} below 1", 1.0 + q)));
        }
        Ok(2.0 * (q.max(0.0) / 2.0).sqrt().asinh() / sk)
    }
}

/// Coefficients of `comparison_median(lambda * sides, k) = c1 lambda + c3 lambda^3 + O(lambda^5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianExpansion {
    pub c1: f64,
    pub c3: f64,
}

/// `c1 = sqrt(2ab^2 + 2ac^2 - bc^2) / 2` and
/// `c3 = -(k/6) * P / (8 sqrt(2(ab^2 + ac^2) - bc^2))` with
/// `P = (ab - ac - bc)(ab + ac - bc)(ab - ac + bc)(ab + ac + bc)`.
///
/// `P < 0` for nondegenerate triangles, so `c3` has the sign of `k`.
pub fn median_expansion_coefficients(sides: &TriangleSides, k: f64) -> Result<MedianExpansion> {
    require_riemann(sides)?;
    let (ab, ac, bc) = (sides.ab, sides.ac, sides.bc);
    let q = 2.0 * (ab * ab + ac * ac) - bc * bc;
    if q <= 0.0 {
        return Err(Error::Degenerate(format!(
            "flat median vanishes for sides ({ab}, {ac}, {bc})"
        )));
    }
    let root = q.sqrt();
    let product = (ab - ac - bc) * (ab + ac - bc) * (ab - ac + bc) * (ab + ac + bc);
    Ok(MedianExpansion { c1: root / 2.0, c3: -(k / 6.0) * product / (8.0 * root) })
}

/// Flat Lorentzian comparison: `a_bar = (0, 0)`, `c_bar = (ac, 0)` and `b_bar`
/// solving `tau(a_bar, b_bar) = ab`, `tau(b_bar, c_bar) = bc` in Minkowski
/// space. Returns `tau(a_bar, M_bar)` for the affine midpoint `M_bar` of
/// `b_bar c_bar`, together with `b_bar`.
pub fn lorentz_comparison_configuration(sides: &TriangleSides) -> Result<(f64, [f64; 2])> {
    if sides.signature != Signature::Lorentz {
        return Err(Error::Precondition("expected a Lorentzian triangle".into()));
    }
    sides.validate()?;
    let (ab, bc, ac) = (sides.ab, sides.bc, sides.ac);
    if ac == 0.0 {
        return Ok((0.0, [0.0, 0.0]));
    }
    // t^2 - x^2 = ab^2 and (ac - t)^2 - x^2 = bc^2
    let t = (ac * ac + ab * ab - bc * bc) / (2.0 * ac);
    let x = (t * t - ab * ab).max(0.0).sqrt();
    let (mt, mx) = ((t + ac) / 2.0, x / 2.0);
    let tau_am = ((mt - mx) * (mt + mx)).max(0.0).sqrt();
    Ok((tau_am, [t, x]))
}

/// `tau(a_bar, M_bar)` of the flat Lorentzian comparison triangle.
pub fn lorentz_comparison_median(sides: &TriangleSides) -> Result<f64> {
    lorentz_comparison_configuration(sides).map(|(m, _)| m)
}
