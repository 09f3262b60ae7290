//! Metrics manufactured from a time separation.
//!
//! The Noldus distance of `x, y` is `sup_z |tau(x, z) - tau(y, z)|`; here the
//! supremum runs over the points of a finite net and over both argument slots
//! of `tau`, so the result is symmetric. A discretized supremum is a lower
//! bound of the continuum one; all consumers use it only where that is sound.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp;
use crate::net::{fmt_real, FiniteNet, SquareMatrix};
use crate::space::{Event, Exponent, SpaceDescriptor};

/// How a [`MetricNet`] was derived from a net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Construction {
    Noldus,
    NoldusSquared,
}

/// Points with a symmetric distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricNet {
    pub construction: Construction,
    points: Vec<Event>,
    dist: SquareMatrix,
}

impl MetricNet {
    pub fn points(&self) -> &[Event] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.dist
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist.get(i, j)
    }

    pub fn diameter(&self) -> f64 {
        self.dist.max_entry()
    }

    /// Restriction to the given indices, keeping the distances.
    pub fn subnet(&self, indices: &[usize]) -> MetricNet {
        MetricNet {
            construction: self.construction,
            points: indices.iter().map(|&i| self.points[i]).collect(),
            dist: SquareMatrix::from_fn(indices.len(), |a, b| self.dist.get(indices[a], indices[b])),
        }
    }

    /// Symmetry, zero diagonal and the triangle inequality within `1e-9`.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            if self.dist(i, i) != 0.0 {
                return Err(Error::Precondition(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let d = self.dist(i, j);
                if d < 0.0 || d != self.dist(j, i) {
                    return Err(Error::Precondition(format!("asymmetric entry ({i}, {j})")));
                }
                for k in 0..n {
                    if d > self.dist(i, k) + self.dist(k, j) + 1e-9 {
                        return Err(Error::Precondition(format!(
                            "triangle inequality fails for ({i}, {k}, {j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Same layout as the net CSV.
    pub fn to_csv(&self) -> String {
        self.dist.to_csv()
    }
}

fn require_lorentzian(net: &FiniteNet) -> Result<()> {
    if net.space().is_lorentzian() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("Noldus metrics need a Lorentzian net".to_string()))
    }
}

fn sup_difference(net: &FiniteNet, i: usize, j: usize, f: impl Fn(f64) -> f64) -> f64 {
    let m = net.matrix();
    let (ri, rj) = (m.row(i), m.row(j));
    let mut best = 0.0f64;
    for z in 0..net.len() {
        let fwd = (f(ri[z]) - f(rj[z])).abs();
        let bwd = (f(m.get(z, i)) - f(m.get(z, j))).abs();
        best = best.max(fwd).max(bwd);
    }
    best
}

/// `max_z max(|tau(i, z) - tau(j, z)|, |tau(z, i) - tau(z, j)|)` over the net.
///
/// # Panics
/// If `i` or `j` is out of range.
pub fn noldus_distance(net: &FiniteNet, i: usize, j: usize) -> f64 {
    sup_difference(net, i, j, |t| t)
}

fn metric_net(net: &FiniteNet, construction: Construction, f: fn(f64) -> f64) -> Result<MetricNet> {
    require_lorentzian(net)?;
    let n = net.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { sup_difference(net, i, j, f) }).collect())
        .collect();
    let dist = SquareMatrix::from_fn(n, |i, j| if i <= j { rows[i][j] } else { rows[j][i] });
    Ok(MetricNet { construction, points: net.points().to_vec(), dist })
}

/// The Noldus metric on all pairs of a Lorentzian net.
pub fn noldus_metric_net(net: &FiniteNet) -> Result<MetricNet> {
    metric_net(net, Construction::Noldus, |t| t)
}

/// The Noldus² metric (`tau^2` in place of `tau`) on all pairs of a net.
pub fn noldus_squared_metric_net(net: &FiniteNet) -> Result<MetricNet> {
    metric_net(net, Construction::NoldusSquared, |t| t * t)
}

/// Grid `{(i / m, j / m) : |i| + |j| <= m}` of the diamond `J((-1, 0), (1, 0))`
/// in the Lorentzian plane.
#[derive(Debug, Clone, PartialEq)]
pub struct DiamondGrid {
    pub space: SpaceDescriptor,
    pub resolution: u32,
    points: Vec<Event>,
}

impl DiamondGrid {
    /// `resolution` subdivisions of the half-diagonal; even values contain
    /// `(1/2, 1/2)`.
    pub fn new(p: Exponent, resolution: u32) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidParameter("diamond resolution must be positive".into()));
        }
        let m = resolution as i64;
        let h = 1.0 / m as f64;
        let points = (-m..=m)
            .flat_map(|i| {
                let w = m - i.abs();
                (-w..=w).map(move |j| Event::plane(i as f64 * h, j as f64 * h))
            })
            .collect();
        Ok(DiamondGrid { space: SpaceDescriptor::lorentz_plane(p), resolution, points })
    }

    pub fn points(&self) -> &[Event] {
        &self.points
    }

    pub fn contains(&self, e: &Event) -> bool {
        e.t().abs() + e.x().abs() <= 1.0 + 1e-15
    }
}

/// `max_z max(|tau(a, z)^2 - tau(b, z)^2|, |tau(z, a)^2 - tau(z, b)^2|)` over
/// the grid points `z`.
pub fn noldus_squared_distance(grid: &DiamondGrid, a: &Event, b: &Event) -> Result<f64> {
    for e in [a, b] {
        if !grid.contains(e) {
            return Err(Error::Precondition(format!("({}, {}) lies outside the diamond", e.t(), e.x())));
        }
    }
    let s = &grid.space;
    let mut best = 0.0f64;
    for z in grid.points() {
        let (az, bz) = (lp::tau(a, z, s)?, lp::tau(b, z, s)?);
        let (za, zb) = (lp::tau(z, a, s)?, lp::tau(z, b, s)?);
        best = best.max((az * az - bz * bz).abs()).max((za * za - zb * zb).abs());
    }
    Ok(best)
}

/// One row of [`steepness_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteepnessRow {
    pub lambda: f64,
    pub bound: f64,
    pub slope: f64,
}

/// `(1/16) (1 - (1 - 2 lambda)^p)^(2/p)`, the witness lower bound on the
/// Noldus² distance of `(0, 0)` and `(0, lambda)`.
pub fn steepness_bound(p: f64, lambda: f64) -> f64 {
    // 1 - (1 - 2 lambda)^p without cancellation
    let gap = -(p * (-2.0 * lambda).ln_1p()).exp_m1();
    (2.0 * gap.ln() / p).exp() / 16.0
}

/// Relative step of the central difference in [`steepness_probe`].
const SLOPE_STEP: f64 = 1e-4;

/// Evaluates [`steepness_bound`] and its central-difference slope on the grid.
///
/// For `p > 2` the slope diverges as `lambda -> 0`, for `p = 2` it tends to
/// `1/4`, and for `p < 2` it vanishes.
pub fn steepness_probe(p: f64, lambdas: &[f64]) -> Result<Vec<SteepnessRow>> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must be finite and > 1, got {p}")));
    }
    if lambdas.iter().any(|&l| !(l > 0.0 && l < 0.5)) || lambdas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter(
            "lambda grid must be strictly decreasing within (0, 1/2)".into(),
        ));
    }
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let h = lambda * SLOPE_STEP;
            let slope = (steepness_bound(p, lambda + h) - steepness_bound(p, lambda - h)) / (2.0 * h);
            SteepnessRow { lambda, bound: steepness_bound(p, lambda), slope }
        })
        .collect())
}

/// Greedy covering count: scan the points in order, and every point not yet
/// covered becomes the centre of a closed `radius`-ball.
///
/// An upper bound for the minimal covering number.
pub fn covering_number(m: &MetricNet, radius: f64) -> Result<usize> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let n = m.len();
    let mut covered = vec![false; n];
    let mut count = 0;
    for c in 0..n {
        if covered[c] {
            continue;
        }
        count += 1;
        for (j, cov) in covered.iter_mut().enumerate() {
            if m.dist(c, j) <= radius {
                *cov = true;
            }
        }
    }
    Ok(count)
}

/// Size of a greedily built set whose pairwise distances all exceed
/// `separation`.
///
/// A closed ball of radius `separation / 2` holds at most one such point, so
/// this is a lower bound for the covering number at that radius.
pub fn packing_number(m: &MetricNet, separation: f64) -> usize {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..m.len() {
        if chosen.iter().all(|&c| m.dist(c, i) > separation) {
            chosen.push(i);
        }
    }
    chosen.len()
}

/// CSV with columns `lambda, bound, slope`.
pub fn steepness_csv(rows: &[SteepnessRow]) -> String {
    let mut out = String::from("lambda,bound,slope\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", fmt_real(r.lambda), fmt_real(r.bound), fmt_real(r.slope));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::sample_net;
    use std::f64::consts::PI;

    fn cyl(p: f64) -> SpaceDescriptor {
        SpaceDescriptor::cylinder(Exponent::Finite(p))
    }

    #[test]
    fn distance_basics() {
        let net = sample_net(&cyl(3.0), 3, 8).unwrap();
        assert_eq!(noldus_distance(&net, 4, 4), 0.0);
        let m = noldus_metric_net(&net).unwrap();
        m.validate().unwrap();
        assert_eq!(m.dist(2, 11), noldus_distance(&net, 2, 11));
        // (0, 0) and (1, 0): z = (1, 0) separates them by tau = 1
        assert_eq!(m.dist(0, 16), 1.0);
        let sq = noldus_squared_metric_net(&net).unwrap();
        sq.validate().unwrap();
    }

    #[test]
    fn middle_slice_witness() {
        let p = 4.0;
        let s = cyl(p);
        let mut pts: Vec<Event> = sample_net(&s, 3, 128).unwrap().points().to_vec();
        let (phi2, delta) = (PI, 0.25);
        pts.push(s.event(0.5, phi2 + delta).unwrap());
        pts.push(s.event(0.5, phi2).unwrap());
        let n = pts.len();
        let net = FiniteNet::from_points(s, pts).unwrap();
        let d = noldus_distance(&net, n - 2, n - 1);
        let witness = (0.5f64.powf(p) - (0.5 - delta).powf(p)).powf(1.0 / p);
        let mesh = 2.0 * PI / 128.0;
        assert!(d >= witness - mesh, "{d} vs {witness}");
        assert!(d <= 0.5 + 1e-12);
    }

    #[test]
    fn refinement_never_decreases() {
        let s = cyl(2.5);
        let a = s.event(0.5, 1.0).unwrap();
        let b = s.event(0.5, 1.3).unwrap();
        let coarse = sample_net(&s, 3, 16).unwrap();
        let fine = sample_net(&s, 5, 32).unwrap();
        let with = |net: &FiniteNet| {
            let mut pts = net.points().to_vec();
            pts.extend([a, b]);
            let n = pts.len();
            let net = FiniteNet::from_points(s, pts).unwrap();
            noldus_distance(&net, n - 2, n - 1)
        };
        assert!(with(&fine) >= with(&coarse));
    }

    #[test]
    fn squared_distance_witness() {
        for p in [1.5, 2.0, 4.0] {
            let grid = DiamondGrid::new(Exponent::Finite(p), 16).unwrap();
            for lambda in [0.125, 1.0 / 64.0] {
                let d = noldus_squared_distance(&grid, &Event::plane(0.0, 0.0), &Event::plane(0.0, lambda))
                    .unwrap();
                assert!(d >= steepness_bound(p, lambda) - 1e-15, "p={p} lambda={lambda}");
            }
            let o = Event::plane(0.1, 0.2);
            assert_eq!(noldus_squared_distance(&grid, &o, &o).unwrap(), 0.0);
        }
        let grid = DiamondGrid::new(Exponent::Finite(2.0), 4).unwrap();
        assert!(noldus_squared_distance(&grid, &Event::plane(0.9, 0.9), &Event::plane(0.0, 0.0)).is_err());
    }

    #[test]
    fn steepness_closed_form() {
        for lambda in [0.25, 0.01, 1e-6] {
            let b = steepness_bound(2.0, lambda);
            let want = (lambda - lambda * lambda) / 4.0;
            assert!((b - want).abs() <= 1e-14 * want, "{b} {want}");
        }
        let rows = steepness_probe(2.0, &[1e-3, 1e-6]).unwrap();
        assert!((rows[1].slope - 0.25).abs() < 1e-6);
        let r4 = steepness_probe(4.0, &[2f64.powi(-10), 2f64.powi(-20)]).unwrap();
        assert!(r4[1].slope > 10.0 * r4[0].slope);
        let r15 = steepness_probe(1.5, &[2f64.powi(-10), 2f64.powi(-20)]).unwrap();
        assert!(r15[1].slope < r15[0].slope);
        assert!(steepness_probe(1.0, &[0.1]).is_err());
        assert!(steepness_probe(3.0, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn covering_and_packing() {
        let net = sample_net(&cyl(2.0), 3, 8).unwrap();
        let m = noldus_metric_net(&net).unwrap();
        assert_eq!(covering_number(&m, m.diameter()).unwrap(), 1);
        assert!(covering_number(&m, 0.0).is_err());
        let empty = m.subnet(&[]);
        assert_eq!(covering_number(&empty, 1.0).unwrap(), 0);
        for r in [0.05, 0.2, 0.4] {
            assert!(packing_number(&m, 2.0 * r) <= covering_number(&m, r).unwrap());
        }
        let tiny = m.subnet(&[0, 16]);
        assert_eq!(covering_number(&tiny, 0.4).unwrap(), 2);
    }
}
