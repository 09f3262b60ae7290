//! Charts, events and causal structure of the example spaces.
//!
//! Every space is two dimensional. Lorentzian kinds carry the time coordinate
//! `t` and one spatial coordinate `x`; on the cylinder `x` is an angle-like
//! coordinate on a circle of the configured circumference, and all spatial
//! differences are taken through the lift-minimal representative.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default cylinder circumference.
pub const DEFAULT_CIRCUMFERENCE: f64 = 2.0 * PI;
/// Default cylinder height.
pub const DEFAULT_HEIGHT: f64 = 1.0;

/// The exponent `p` of an l^p-type norm or time separation, `p >= 1`.
///
/// `p = inf` is its own variant and never a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "exponent must be a finite real or `inf`, got {p}"
            )));
        }
        if p < 1.0 {
            return Err(Error::InvalidParameter(format!("exponent p must be >= 1, got {p}")));
        }
        Ok(Exponent::Finite(p))
    }

    /// The finite value, if any.
    pub fn value(self) -> Option<f64> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// True for `p = 2`, the inner-product case.
    pub fn is_euclidean(self) -> bool {
        self == Exponent::Finite(2.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            _ => {
                let p: f64 = s
                    .parse()
                    .map_err(|_| Error::Parse(format!("cannot parse exponent `{s}`")))?;
                Exponent::finite(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => serializer.serialize_f64(*p),
            Exponent::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Num(p) => Exponent::finite(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Coordinate chart an [`Event`] lives in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "camelCase")]
pub enum Chart {
    /// The Lorentzian plane R^{1,1}.
    Plane,
    /// The flat cylinder `[0, height] x S^1`, circle of the given circumference.
    Cylinder { circumference: f64 },
    /// The Riemannian plane with an l^p norm.
    NormedPlane,
}

/// A point `(t, x)` in one of the charts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    t: f64,
    x: f64,
    chart: Chart,
}

impl Event {
    /// Builds an event, normalizing the cylinder coordinate into `[0, C)`.
    pub fn new(t: f64, x: f64, chart: Chart) -> Result<Self> {
        if !t.is_finite() || !x.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "event coordinates must be finite, got ({t}, {x})"
            )));
        }
        let x = match chart {
            Chart::Cylinder { circumference } => {
                if !(circumference > 0.0 && circumference.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "circumference must be positive, got {circumference}"
                    )));
                }
                normalize_angle(x, circumference)
            }
            _ => x,
        };
        Ok(Event { t, x, chart })
    }

    pub fn plane(t: f64, x: f64) -> Self {
        Event::new(t, x, Chart::Plane).expect("finite plane coordinates")
    }

    pub fn normed(t: f64, x: f64) -> Self {
        Event::new(t, x, Chart::NormedPlane).expect("finite plane coordinates")
    }

    pub fn on_cylinder(t: f64, x: f64, circumference: f64) -> Self {
        Event::new(t, x, Chart::Cylinder { circumference }).expect("finite cylinder coordinates")
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    /// Same coordinates shifted by `(dt, dx)` in the same chart.
    pub fn translated(&self, dt: f64, dx: f64) -> Result<Self> {
        Event::new(self.t + dt, self.x + dx, self.chart)
    }
}

fn normalize_angle(x: f64, circumference: f64) -> f64 {
    let r = x.rem_euclid(circumference);
    // rem_euclid can round up to the modulus itself for tiny negative inputs
    if r >= circumference {
        0.0
    } else {
        r
    }
}

/// Which example space a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SpaceDescriptor {
    /// `(R^{1,1}, tau^p)`.
    LorentzPlane { p: Exponent },
    /// `Cyl^p = ([0, height] x S^1, tau^p)`.
    LorentzCylinder { p: Exponent, height: f64, circumference: f64 },
    /// `(R^2, l^p)`.
    NormedPlane { p: Exponent },
    /// Round sphere of constant curvature `k > 0`.
    Sphere { k: f64 },
}

impl SpaceDescriptor {
    pub fn lorentz_plane(p: Exponent) -> Self {
        SpaceDescriptor::LorentzPlane { p }
    }

    /// `Cyl^p` with the default height 1 and circumference 2*pi.
    pub fn cylinder(p: Exponent) -> Self {
        SpaceDescriptor::LorentzCylinder {
            p,
            height: DEFAULT_HEIGHT,
            circumference: DEFAULT_CIRCUMFERENCE,
        }
    }

    pub fn cylinder_with(p: Exponent, height: f64, circumference: f64) -> Result<Self> {
        let s = SpaceDescriptor::LorentzCylinder { p, height, circumference };
        s.validate()?;
        Ok(s)
    }

    pub fn normed_plane(p: Exponent) -> Self {
        SpaceDescriptor::NormedPlane { p }
    }

    pub fn sphere(k: f64) -> Result<Self> {
        let s = SpaceDescriptor::Sphere { k };
        s.validate()?;
        Ok(s)
    }

    /// Checks the descriptor invariants.
    ///
    /// Cylinders must satisfy `height <= circumference / 2`: winding timelike
    /// curves are not modelled, and on such cylinders the lift-minimal
    /// representative realizes the separation.
    pub fn validate(&self) -> Result<()> {
        match *self {
            SpaceDescriptor::LorentzPlane { p } | SpaceDescriptor::NormedPlane { p } => {
                check_exponent(p)
            }
            SpaceDescriptor::LorentzCylinder { p, height, circumference } => {
                check_exponent(p)?;
                if !(height > 0.0 && height.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "height must be positive, got {height}"
                    )));
                }
                if !(circumference > 0.0 && circumference.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "circumference must be positive, got {circumference}"
                    )));
                }
                if height > circumference / 2.0 {
                    return Err(Error::InvalidParameter(format!(
                        "height {height} exceeds half the circumference {circumference}; \
                         winding timelike curves are not supported"
                    )));
                }
                Ok(())
            }
            SpaceDescriptor::Sphere { k } => {
                if k > 0.0 && k.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("sphere curvature must be > 0, got {k}")))
                }
            }
        }
    }

    pub fn is_lorentzian(&self) -> bool {
        matches!(
            self,
            SpaceDescriptor::LorentzPlane { .. } | SpaceDescriptor::LorentzCylinder { .. }
        )
    }

    pub fn exponent(&self) -> Option<Exponent> {
        match *self {
            SpaceDescriptor::LorentzPlane { p }
            | SpaceDescriptor::LorentzCylinder { p, .. }
            | SpaceDescriptor::NormedPlane { p } => Some(p),
            SpaceDescriptor::Sphere { .. } => None,
        }
    }

    /// The chart events of this space must carry.
    pub fn chart(&self) -> Option<Chart> {
        match *self {
            SpaceDescriptor::LorentzPlane { .. } => Some(Chart::Plane),
            SpaceDescriptor::LorentzCylinder { circumference, .. } => {
                Some(Chart::Cylinder { circumference })
            }
            SpaceDescriptor::NormedPlane { .. } => Some(Chart::NormedPlane),
            SpaceDescriptor::Sphere { .. } => None,
        }
    }

    /// Builds an event in this space's chart.
    pub fn event(&self, t: f64, x: f64) -> Result<Event> {
        let chart = self.chart().ok_or_else(|| {
            Error::ChartMismatch("the sphere has no (t, x) event chart".to_string())
        })?;
        Event::new(t, x, chart)
    }

    /// Time difference and lift-minimal absolute spatial difference of `b - a`.
    pub fn displacement(&self, a: &Event, b: &Event) -> Result<(f64, f64)> {
        let chart = self.chart().ok_or_else(|| {
            Error::ChartMismatch("the sphere has no (t, x) event chart".to_string())
        })?;
        for e in [a, b] {
            if e.chart != chart {
                return Err(Error::ChartMismatch(format!(
                    "event chart {:?} does not match space chart {:?}",
                    e.chart, chart
                )));
            }
        }
        let dt = b.t - a.t;
        let dx = match chart {
            Chart::Cylinder { circumference } => lift_minimal_delta(a, b, circumference),
            _ => (b.x - a.x).abs(),
        };
        Ok((dt, dx))
    }
}

fn check_exponent(p: Exponent) -> Result<()> {
    match p {
        Exponent::Finite(v) if !(v >= 1.0 && v.is_finite()) => {
            Err(Error::InvalidParameter(format!("exponent p must be >= 1, got {v}")))
        }
        _ => Ok(()),
    }
}

/// `min_m |b.x - a.x + m C|` over integers `m`, in `[0, C/2]`.
///
/// Symmetric in `a` and `b` bit for bit.
pub fn lift_minimal_delta(a: &Event, b: &Event, circumference: f64) -> f64 {
    let d = (b.x - a.x).abs().rem_euclid(circumference);
    let d = if d >= circumference { 0.0 } else { d };
    d.min(circumference - d)
}

/// Causal relation of an ordered pair of events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CausalRelation {
    /// `a << b`: `dt > |dx*|`.
    Chronological,
    /// `a <= b` but not `a << b`: null separated, or `a == b`.
    CausalNull,
    Unrelated,
}

/// Classifies `(a, b)`. Independent of the exponent `p`.
pub fn causal_relation(a: &Event, b: &Event, space: &SpaceDescriptor) -> Result<CausalRelation> {
    if !space.is_lorentzian() {
        return Err(Error::ChartMismatch(
            "causal relations are only defined on Lorentzian spaces".to_string(),
        ));
    }
    let (dt, dx) = space.displacement(a, b)?;
    Ok(classify(dt, dx))
}

pub(crate) fn classify(dt: f64, dx: f64) -> CausalRelation {
    if dt > dx {
        CausalRelation::Chronological
    } else if (dt == dx && dt > 0.0) || (dt == 0.0 && dx == 0.0) {
        CausalRelation::CausalNull
    } else {
        CausalRelation::Unrelated
    }
}
