//! Certificates for the absence of sectional curvature bounds.
//!
//! In a normed plane (or an l^p-type Lorentzian plane) the median from the
//! apex of the triangle `0, lambda x, lambda y` deviates from the flat
//! comparison median by exactly `lambda` times a constant, because the norm
//! is homogeneous. The deviation inside a constant-curvature model space only
//! starts at order `lambda^3`. Whenever the parallelogram law fails, the
//! linear defect wins for small `lambda` and rules out every curvature bound.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::comparison::{self, TriangleSides};
use crate::error::{Error, Result};
use crate::lp::{self, LorentzVector, NormMode};
use crate::net::fmt_real;
use crate::space::{Exponent, SpaceDescriptor};

/// Defects with magnitude at or below this are treated as zero.
pub const DEFECT_FLOOR: f64 = 1e-13;

/// `[2^-from, ..., 2^-to]`, strictly decreasing.
pub fn dyadic_grid(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|j| 2f64.powi(-j)).collect()
}

/// Default certificate grid `2^-1 .. 2^-20`.
pub fn default_lambda_grid() -> Vec<f64> {
    dyadic_grid(1, 20)
}

/// Medians of the scaled triangle `a = 0, b = lambda x, c = lambda y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianSample {
    pub lambda: f64,
    pub sides: TriangleSides,
    /// `|M|` (or `tau(0, M)`) for `M = lambda (x + y) / 2`.
    pub space_median: f64,
    /// `sqrt(ab^2/2 + ac^2/2 - bc^2/4)` of the same triangle.
    pub flat_median: f64,
}

impl MedianSample {
    pub fn defect(&self) -> f64 {
        self.space_median - self.flat_median
    }
}

fn space_norm(space: &SpaceDescriptor, v: LorentzVector) -> Result<f64> {
    match *space {
        SpaceDescriptor::LorentzPlane { p } => Ok(lp::lorentz_norm(v, p)),
        SpaceDescriptor::LorentzCylinder { .. } => {
            let o = space.event(0.0, 0.0)?;
            lp::tau(&o, &space.event(v.v0, v.v1)?, space)
        }
        SpaceDescriptor::NormedPlane { p } => Ok(lp::lp_norm(v, p)),
        SpaceDescriptor::Sphere { .. } => Err(Error::InvalidParameter(
            "median defects need a plane or cylinder space".to_string(),
        )),
    }
}

fn check_chronological(space: &SpaceDescriptor, name: &str, v: LorentzVector) -> Result<()> {
    let o = space.event(0.0, 0.0)?;
    let e = space.event(v.v0, v.v1)?;
    let (dt, dx) = space.displacement(&o, &e)?;
    if dt > dx {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{name} = ({}, {}) is not chronologically after 0",
            v.v0, v.v1
        )))
    }
}

/// Evaluates both medians of the triangle scaled by `lambda`.
pub fn median_sample(
    space: &SpaceDescriptor,
    x: LorentzVector,
    y: LorentzVector,
    lambda: f64,
) -> Result<MedianSample> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must be in (0, 1], got {lambda}")));
    }
    let (lx, ly) = (x.scaled(lambda), y.scaled(lambda));
    if space.is_lorentzian() {
        for (name, v) in [("x", lx), ("y", ly), ("x+y", lx + ly), ("x-y", lx - ly)] {
            check_chronological(space, name, v)?;
        }
    }
    let ab = space_norm(space, lx)?;
    let ac = space_norm(space, ly)?;
    let bc = space_norm(space, lx - ly)?;
    let space_median = space_norm(space, (lx + ly).scaled(0.5))?;
    let signature = if space.is_lorentzian() {
        comparison::Signature::Lorentz
    } else {
        comparison::Signature::Riemann
    };
    let sides = TriangleSides { ab, ac, bc, signature };
    Ok(MedianSample { lambda, sides, space_median, flat_median: sides.flat_median() })
}

/// `eps_lambda = aM_lambda - flat median` of the scaled triangle.
pub fn median_defect(
    space: &SpaceDescriptor,
    x: LorentzVector,
    y: LorentzVector,
    lambda: f64,
) -> Result<f64> {
    median_sample(space, x, y, lambda).map(|s| s.defect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DefectSign {
    Positive,
    Negative,
    Zero,
}

/// What a scaling profile is measured on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileInput {
    /// Median defect of `0, lambda x, lambda y` in a plane or cylinder.
    Vectors { space: SpaceDescriptor, x: LorentzVector, y: LorentzVector },
    /// Spherical comparison median minus flat median of `lambda * sides`.
    Sphere { k: f64, sides: TriangleSides },
}

/// Defects over a shrinking `lambda` grid with a log-log power fit.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectProfile {
    pub lambdas: Vec<f64>,
    pub defects: Vec<f64>,
    pub comparison_medians: Vec<f64>,
    pub space_medians: Vec<f64>,
    /// Least-squares slope of `ln|defect|` against `ln lambda`; `None` for a
    /// zero-defect profile.
    pub fitted_exponent: Option<f64>,
    pub fitted_sign: DefectSign,
}

impl DefectProfile {
    /// CSV with columns `lambda, defect, comparison_median, space_median`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,defect,comparison_median,space_median\n");
        for i in 0..self.lambdas.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_real(self.lambdas[i]),
                fmt_real(self.defects[i]),
                fmt_real(self.comparison_medians[i]),
                fmt_real(self.space_medians[i])
            );
        }
        out
    }
}

fn check_dyadic(lambdas: &[f64]) -> Result<()> {
    if lambdas.len() < 6 {
        return Err(Error::InvalidParameter(format!(
            "need at least 6 lambda values, got {}",
            lambdas.len()
        )));
    }
    for w in lambdas.windows(2) {
        if !(w[1] > 0.0 && (w[0] / w[1] - 2.0).abs() < 1e-12) {
            return Err(Error::InvalidParameter(
                "lambda grid must be dyadic and strictly decreasing".to_string(),
            ));
        }
    }
    Ok(())
}

/// Least-squares slope of `ys` against `xs`.
pub(crate) fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Fits the power law of the median defect over a dyadic `lambda` grid.
pub fn scaling_exponent(input: &ProfileInput, lambdas: &[f64]) -> Result<DefectProfile> {
    check_dyadic(lambdas)?;
    let mut defects = Vec::with_capacity(lambdas.len());
    let mut comparison_medians = Vec::with_capacity(lambdas.len());
    let mut space_medians = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let (space_median, flat) = match *input {
            ProfileInput::Vectors { space, x, y } => {
                let s = median_sample(&space, x, y, lambda)?;
                (s.space_median, s.flat_median)
            }
            ProfileInput::Sphere { k, sides } => {
                let scaled = sides.scaled(lambda);
                (comparison::comparison_median(&scaled, k)?, scaled.flat_median())
            }
        };
        defects.push(space_median - flat);
        comparison_medians.push(flat);
        space_medians.push(space_median);
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(&defects)
        .filter(|(_, d)| d.abs() > DEFECT_FLOOR)
        .map(|(l, d)| (l.ln(), d.abs().ln()))
        .unzip();
    let (fitted_exponent, fitted_sign) = if lx.len() < 2 {
        (None, DefectSign::Zero)
    } else {
        let total: f64 = defects.iter().filter(|d| d.abs() > DEFECT_FLOOR).sum();
        let sign = if total > 0.0 { DefectSign::Positive } else { DefectSign::Negative };
        (Some(ls_slope(&lx, &ly)), sign)
    };
    Ok(DefectProfile {
        lambdas: lambdas.to_vec(),
        defects,
        comparison_medians,
        space_medians,
        fitted_exponent,
        fitted_sign,
    })
}

/// A pair of vectors whose parallelogram law fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrupleWitness {
    pub x: LorentzVector,
    pub y: LorentzVector,
    pub defect: f64,
}

/// Denominator of the rational search grid.
pub const QUADRUPLE_GRID_DENOMINATOR: f64 = 4.0;

/// Scans `x, y` over `{(a/4, b/4) : |a|, |b| <= grid_radius}` and returns the
/// admissible pair with the largest `|E|` (first in scan order on ties).
///
/// Lorentzian spaces require `x, y, x+y, x-y >> 0`; normed planes accept every
/// pair. Returns `None` when no pair breaks the parallelogram law beyond
/// rounding, which is the case exactly for `p = 2`.
pub fn quadruple_search(space: &SpaceDescriptor, grid_radius: u32) -> Result<Option<QuadrupleWitness>> {
    let (p, mode) = match *space {
        SpaceDescriptor::LorentzPlane { p } | SpaceDescriptor::LorentzCylinder { p, .. } => {
            (p, NormMode::Lorentz)
        }
        SpaceDescriptor::NormedPlane { p } => (p, NormMode::Riemann),
        SpaceDescriptor::Sphere { .. } => {
            return Err(Error::InvalidParameter("quadruple search needs a plane space".into()))
        }
    };
    if p.is_infinite() {
        return Err(Error::InvalidParameter("quadruple search needs a finite exponent".into()));
    }
    if grid_radius == 0 {
        return Err(Error::InvalidParameter("grid radius must be positive".into()));
    }
    let r = grid_radius as i64;
    let coords: Vec<LorentzVector> = (-r..=r)
        .flat_map(|a| (-r..=r).map(move |b| (a, b)))
        .map(|(a, b)| {
            LorentzVector::new(a as f64 / QUADRUPLE_GRID_DENOMINATOR, b as f64 / QUADRUPLE_GRID_DENOMINATOR)
        })
        .filter(|v| mode == NormMode::Riemann || v.is_future_timelike())
        .collect();
    let norm = |v: LorentzVector| match mode {
        NormMode::Lorentz => lp::lorentz_norm(v, p),
        NormMode::Riemann => lp::lp_norm(v, p),
    };
    let mut best: Option<QuadrupleWitness> = None;
    for &x in &coords {
        for &y in &coords {
            if mode == NormMode::Lorentz && !((x + y).is_future_timelike() && (x - y).is_future_timelike()) {
                continue;
            }
            let Ok(e) = lp::parallelogram_defect(x, y, p, mode) else { continue };
            let scale = 2.0 * norm(x).powi(2) + 2.0 * norm(y).powi(2);
            if e.abs() <= 1e-10 * scale {
                continue;
            }
            if best.is_none_or(|b| e.abs() > b.defect.abs()) {
                best = Some(QuadrupleWitness { x, y, defect: e });
            }
        }
    }
    Ok(best)
}

/// Outcome of a curvature-bound probe.
///
/// The labels follow the comparison definition: a lower bound `k` demands
/// `d(a, M) >= d(a_bar, M_bar)`, an upper bound demands `<=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BoundVerdict {
    ViolatesLowerBound,
    ViolatesUpperBound,
    Consistent,
}

/// One row of a certificate sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateRow {
    pub lambda: f64,
    pub space_median: f64,
    pub flat_median: f64,
    pub comparison_median: f64,
    /// Rounding error estimate of the three medians.
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub k_probe: f64,
    pub verdict: BoundVerdict,
    /// Rows actually used; the sweep stops once rounding swamps the defect.
    pub rows: Vec<CertificateRow>,
}

/// Required ratio between an inequality margin and its rounding error.
const CERTIFICATE_MARGIN: f64 = 10.0;

/// Curvature-`k` comparison median of arbitrary side data, without the
/// triangle-inequality check; for Lorentzian side data this is the formal
/// continuation of the same closed form.
fn formal_comparison_median(sides: &TriangleSides, k: f64) -> Result<f64> {
    let riemann = TriangleSides { signature: comparison::Signature::Riemann, ..*sides };
    if riemann.validate().is_ok() {
        comparison::comparison_median(&riemann, k)
    } else {
        comparison::comparison_median_unchecked(&riemann, k)
    }
}

/// Compares the space median with the curvature-`k_probe` comparison median
/// on a shrinking `lambda` grid.
///
/// A violation is reported only when, at each of the three smallest `lambda`
/// values that still carry signal, the linear defect and the gap to the
/// comparison median both exceed ten times the rounding estimate and share
/// their sign. Since the defect is exactly linear in `lambda` and the
/// curvature correction is cubic, such a violation persists as `lambda -> 0`.
pub fn bound_violation_certificate(
    space: &SpaceDescriptor,
    x: LorentzVector,
    y: LorentzVector,
    k_probe: f64,
    lambdas: &[f64],
) -> Result<Certificate> {
    if k_probe == 0.0 || !k_probe.is_finite() {
        return Err(Error::InvalidParameter(format!("kProbe must be finite and nonzero, got {k_probe}")));
    }
    if lambdas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("lambda grid must be strictly decreasing".into()));
    }
    let mut rows = Vec::new();
    for &lambda in lambdas {
        let s = median_sample(space, x, y, lambda)?;
        let Ok(cmp) = formal_comparison_median(&s.sides, k_probe) else { continue };
        let error_estimate = 64.0 * f64::EPSILON * (s.space_median + s.flat_median + cmp);
        if (s.space_median - s.flat_median).abs() < CERTIFICATE_MARGIN * error_estimate {
            break;
        }
        rows.push(CertificateRow {
            lambda,
            space_median: s.space_median,
            flat_median: s.flat_median,
            comparison_median: cmp,
            error_estimate,
        });
    }
    let verdict = if rows.len() < 3 {
        BoundVerdict::Consistent
    } else {
        let tail = &rows[rows.len() - 3..];
        let sign = (tail[0].space_median - tail[0].flat_median).signum();
        let persistent = tail.iter().all(|r| {
            let gap = r.space_median - r.comparison_median;
            let eps = r.space_median - r.flat_median;
            eps.signum() == sign
                && gap.signum() == sign
                && gap.abs() >= CERTIFICATE_MARGIN * r.error_estimate
        });
        match (persistent, sign > 0.0) {
            (false, _) => BoundVerdict::Consistent,
            (true, true) => BoundVerdict::ViolatesUpperBound,
            (true, false) => BoundVerdict::ViolatesLowerBound,
        }
    };
    Ok(Certificate { k_probe, verdict, rows })
}

/// The swapped pair `u = (x + y)/2`, `v = (x - y)/2`, for which the
/// parallelogram defect flips sign: `E(u, v) = -E(x, y) / 2`.
pub fn swapped_orientation(x: LorentzVector, y: LorentzVector) -> (LorentzVector, LorentzVector) {
    ((x + y).scaled(0.5), (x - y).scaled(0.5))
}

/// Certificates for `(x, y)` and for the swapped orientation.
pub fn certify_both_orientations(
    space: &SpaceDescriptor,
    x: LorentzVector,
    y: LorentzVector,
    k_probe: f64,
    lambdas: &[f64],
) -> Result<(Certificate, Certificate)> {
    let (u, v) = swapped_orientation(x, y);
    Ok((
        bound_violation_certificate(space, x, y, k_probe, lambdas)?,
        bound_violation_certificate(space, u, v, k_probe, lambdas)?,
    ))
}

/// True for `p = 2` spaces, where every certificate must come out consistent.
pub fn is_flat(space: &SpaceDescriptor) -> bool {
    space.exponent().is_some_and(Exponent::is_euclidean)
}
