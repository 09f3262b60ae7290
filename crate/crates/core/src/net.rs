//! Finite nets: a list of events together with their separation matrix.
//!
//! Lorentzian nets store the non-negative `tau(i, j)`; the antisymmetric
//! version is `tau(i, j) - tau(j, i)`. Riemannian nets store distances.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lp;
use crate::space::{Event, SpaceDescriptor};

/// Row-major square matrix of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SquareMatrix { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// CSV with row and column headers equal to the point indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index");
        for j in 0..self.n {
            let _ = write!(out, ",{j}");
        }
        out.push('\n');
        for i in 0..self.n {
            let _ = write!(out, "{i}");
            for j in 0..self.n {
                let _ = write!(out, ",{}", fmt_real(self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

/// Formats a real with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// A finite sample of one of the example spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteNet {
    space: SpaceDescriptor,
    points: Vec<Event>,
    sep: SquareMatrix,
}

impl FiniteNet {
    /// Evaluates all pairwise separations of `points` in `space`.
    pub fn from_points(space: SpaceDescriptor, points: Vec<Event>) -> Result<Self> {
        space.validate()?;
        let n = points.len();
        let mut sep = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sep.set(i, j, pair_separation(&space, &points[i], &points[j])?);
                }
            }
        }
        Ok(FiniteNet { space, points, sep })
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

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
        &self.sep
    }

    #[inline]
    pub fn sep(&self, i: usize, j: usize) -> f64 {
        self.sep.get(i, j)
    }

    /// `tau(i, j) - tau(j, i)` for Lorentzian nets; the distance otherwise.
    #[inline]
    pub fn signed(&self, i: usize, j: usize) -> f64 {
        if self.space.is_lorentzian() {
            self.sep.get(i, j) - self.sep.get(j, i)
        } else {
            self.sep.get(i, j)
        }
    }

    /// Sub-net on the given point indices, in that order.
    pub fn subnet(&self, indices: &[usize]) -> FiniteNet {
        let points = indices.iter().map(|&i| self.points[i]).collect();
        let sep = SquareMatrix::from_fn(indices.len(), |a, b| self.sep.get(indices[a], indices[b]));
        FiniteNet { space: self.space, points, sep }
    }

    /// Checks the stored matrix against the net invariants.
    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        let n = self.len();
        if self.sep.size() != n {
            return Err(Error::InvalidParameter(format!(
                "separation matrix is {0}x{0} but there are {n} points",
                self.sep.size()
            )));
        }
        for i in 0..n {
            if self.sep.get(i, i) != 0.0 {
                return Err(Error::InvalidParameter(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..n {
                let v = self.sep.get(i, j);
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidParameter(format!("bad entry sep[{i}][{j}] = {v}")));
                }
                let fresh = pair_separation(&self.space, &self.points[i], &self.points[j])?;
                if i != j && (fresh - v).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "sep[{i}][{j}] = {v} disagrees with re-evaluation {fresh}"
                    )));
                }
            }
        }
        if self.space.is_lorentzian() {
            for i in 0..n {
                for j in 0..i {
                    if self.sep.get(i, j) > 0.0 && self.sep.get(j, i) > 0.0 {
                        return Err(Error::InvalidParameter(format!(
                            "both sep[{i}][{j}] and sep[{j}][{i}] are positive"
                        )));
                    }
                }
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    if (self.sep.get(i, j) - self.sep.get(j, i)).abs() > 1e-12 {
                        return Err(Error::InvalidParameter(format!("asymmetric at ({i}, {j})")));
                    }
                    for k in 0..n {
                        if self.sep.get(i, k) > self.sep.get(i, j) + self.sep.get(j, k) + 1e-9 {
                            return Err(Error::InvalidParameter(format!(
                                "triangle inequality fails at ({i}, {j}, {k})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// JSON object `{space, points: [[t, x], ...], sep: [[...], ...]}` with
    /// reals printed to 17 significant digits.
    pub fn to_json(&self) -> String {
        let space = serde_json::to_string(&self.space).expect("descriptor serializes");
        let mut out = String::new();
        let _ = write!(out, "{{\"space\":{space},\"points\":[");
        for (i, e) in self.points.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "[{},{}]", fmt_real(e.t()), fmt_real(e.x()));
        }
        out.push_str("],\"sep\":[");
        for i in 0..self.len() {
            if i > 0 {
                out.push(',');
            }
            out.push('[');
            for j in 0..self.len() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&fmt_real(self.sep.get(i, j)));
            }
            out.push(']');
        }
        out.push_str("]}");
        out
    }

    /// Parses the JSON form and validates it against re-evaluated separations.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            space: SpaceDescriptor,
            points: Vec<[f64; 2]>,
            sep: Vec<Vec<f64>>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let points = raw
            .points
            .iter()
            .map(|&[t, x]| raw.space.event(t, x))
            .collect::<Result<Vec<_>>>()?;
        let n = points.len();
        if raw.sep.len() != n || raw.sep.iter().any(|r| r.len() != n) {
            return Err(Error::Parse(format!("sep must be a {n}x{n} matrix")));
        }
        let sep = SquareMatrix::from_fn(n, |i, j| raw.sep[i][j]);
        let net = FiniteNet { space: raw.space, points, sep };
        net.validate()?;
        Ok(net)
    }
}

fn pair_separation(space: &SpaceDescriptor, a: &Event, b: &Event) -> Result<f64> {
    match *space {
        SpaceDescriptor::LorentzPlane { .. } | SpaceDescriptor::LorentzCylinder { .. } => {
            lp::tau(a, b, space)
        }
        SpaceDescriptor::NormedPlane { p } => {
            space.displacement(a, b)?;
            Ok(lp::lp_plane_distance(a, b, p))
        }
        SpaceDescriptor::Sphere { .. } => Err(Error::ChartMismatch(
            "finite nets are not supported on the sphere".to_string(),
        )),
    }
}

/// Uniform grid `{(i * height / (nT - 1), j * C / nX)}` on a cylinder, time
/// index major.
pub fn sample_net(space: &SpaceDescriptor, n_t: usize, n_x: usize) -> Result<FiniteNet> {
    let SpaceDescriptor::LorentzCylinder { height, circumference, .. } = *space else {
        return Err(Error::InvalidParameter("grid sampling needs a cylinder space".to_string()));
    };
    if n_t < 2 {
        return Err(Error::InvalidParameter(format!("nT must be >= 2, got {n_t}")));
    }
    if n_x < 1 {
        return Err(Error::InvalidParameter(format!("nX must be >= 1, got {n_x}")));
    }
    let mut points = Vec::with_capacity(n_t * n_x);
    for i in 0..n_t {
        let t = i as f64 * height / (n_t - 1) as f64;
        for j in 0..n_x {
            points.push(space.event(t, j as f64 * circumference / n_x as f64)?);
        }
    }
    FiniteNet::from_points(*space, points)
}

/// Grid spacings `(height / (nT - 1), C / nX)` of [`sample_net`].
pub fn grid_mesh(space: &SpaceDescriptor, n_t: usize, n_x: usize) -> Option<(f64, f64)> {
    match *space {
        SpaceDescriptor::LorentzCylinder { height, circumference, .. } if n_t >= 2 && n_x >= 1 => {
            Some((height / (n_t - 1) as f64, circumference / n_x as f64))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Exponent;
    use std::f64::consts::PI;

    #[test]
    fn two_point_cylinder_net() {
        let net = sample_net(&SpaceDescriptor::cylinder(Exponent::Finite(2.0)), 2, 1).unwrap();
        assert_eq!(net.len(), 2);
        assert_eq!(net.sep(0, 1), 1.0);
        assert_eq!(net.sep(1, 0), 0.0);
        net.validate().unwrap();
    }

    #[test]
    fn equal_time_pairs_are_unrelated() {
        let net = sample_net(&SpaceDescriptor::cylinder(Exponent::Finite(3.0)), 2, 4).unwrap();
        assert_eq!(net.len(), 8);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(net.sep(i, j), 0.0);
                assert_eq!(net.sep(4 + i, 4 + j), 0.0);
            }
        }
    }

    #[test]
    fn bad_grid_sizes() {
        let s = SpaceDescriptor::cylinder(Exponent::Finite(2.0));
        assert!(sample_net(&s, 1, 4).is_err());
        assert!(sample_net(&s, 2, 0).is_err());
        assert!(sample_net(&SpaceDescriptor::lorentz_plane(Exponent::Finite(2.0)), 2, 2).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let s = SpaceDescriptor::cylinder(Exponent::Finite(1.5));
        let net = sample_net(&s, 3, 5).unwrap();
        let text = net.to_json();
        let back = FiniteNet::from_json(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn tampered_json_is_rejected() {
        let s = SpaceDescriptor::cylinder(Exponent::Finite(2.0));
        let net = sample_net(&s, 2, 1).unwrap();
        let text = net.to_json().replace("[0.0000000000000000e0,1.0000000000000000e0]", "[0.0,0.5]");
        assert!(FiniteNet::from_json(&text).is_err());
    }

    #[test]
    fn csv_layout() {
        let net = sample_net(&SpaceDescriptor::cylinder(Exponent::Finite(2.0)), 2, 1).unwrap();
        let csv = net.matrix().to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "index,0,1");
        assert_eq!(lines[1], "0,0.0000000000000000e0,1.0000000000000000e0");
    }

    #[test]
    fn riemannian_net_validates() {
        let s = SpaceDescriptor::normed_plane(Exponent::Finite(1.0));
        let pts = vec![Event::normed(0.0, 0.0), Event::normed(1.0, 0.0), Event::normed(0.3, 2.0)];
        let net = FiniteNet::from_points(s, pts).unwrap();
        net.validate().unwrap();
        assert_eq!(net.sep(0, 2), 2.3);
        assert_eq!(grid_mesh(&SpaceDescriptor::cylinder(Exponent::Infinite), 3, 4), Some((0.5, PI / 2.0)));
    }
}
