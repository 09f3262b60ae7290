//! Lorentzian Hausdorff measures of the unit diamond from diamond coverings.
//!
//! Splitting the unit diamond into `k` symmetric pieces per side and each of
//! those into `n` tilted diamonds gives total `d`-volume
//! `v(p, d, n, k) = n k^(2-d) ((1/2 + 1/(2n))^p - (1/2 - 1/(2n))^p)^(d/p)`.
//! Refining (`k -> inf`) while choosing the best `n` decides whether the
//! `d`-dimensional measure is zero, finite or infinite.

use std::f64::consts::{LN_2, PI};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::net::fmt_real;

/// `omega_N = pi^((N-1)/2) / (N Gamma((N+1)/2) 2^(N-1))`.
pub fn omega_n(n: f64) -> Result<f64> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidParameter(format!("N must be positive, got {n}")));
    }
    let ln = 0.5 * (n - 1.0) * PI.ln() - n.ln() - ln_gamma(0.5 * (n + 1.0)) - (n - 1.0) * LN_2;
    Ok(ln.exp())
}

/// `rho_N(J(p, q)) = omega_N tau(p, q)^N`.
pub fn diamond_volume(n: f64, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be nonnegative, got {tau}")));
    }
    Ok(omega_n(n)? * tau.powf(n))
}

fn check_pd(p: f64, d: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must be finite and >= 1, got {p}")));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(format!("d must be positive, got {d}")));
    }
    Ok(())
}

/// `ln((1/2 + h/2)^p - (1/2 - h/2)^p)` for `h in (0, 1]`.
///
/// Written as `(1-h)^p expm1(2p atanh h) / 2^p` so that the difference keeps
/// full relative accuracy as `h -> 0`.
fn ln_tilted_gap(p: f64, h: f64) -> f64 {
    if h >= 1.0 {
        return 0.0;
    }
    -p * LN_2 + p * (-h).ln_1p() + (2.0 * p * h.atanh()).exp_m1().ln()
}

/// `ln w(n)` with `w(n) = v(p, d, n, 1)`, for `ln n` and `h = 1/n` given.
fn ln_w(p: f64, d: f64, ln_n: f64, h: f64) -> f64 {
    ln_n + d / p * ln_tilted_gap(p, h)
}

/// `ln v(p, d, n, k)`.
pub fn ln_covering_volume_v(p: f64, d: f64, n: u64, k: u64) -> Result<f64> {
    check_pd(p, d)?;
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter("n and k must be >= 1".to_string()));
    }
    let nf = n as f64;
    Ok(ln_w(p, d, nf.ln(), 1.0 / nf) + (2.0 - d) * (k as f64).ln())
}

/// `v(p, d, n, k) = n (1/k)^(d-2) ((1/(2n) + 1/2)^p - (1/2 - 1/(2n))^p)^(d/p)`.
pub fn covering_volume_v(p: f64, d: f64, n: u64, k: u64) -> Result<f64> {
    ln_covering_volume_v(p, d, n, k).map(f64::exp)
}

/// Behaviour of a volume sequence in the limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", content = "value", rename_all = "camelCase")]
pub enum Limit {
    Zero,
    Finite(f64),
    Infinite,
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Zero => write!(f, "zero"),
            Limit::Finite(_) => write!(f, "finite"),
            Limit::Infinite => write!(f, "infinite"),
        }
    }
}

/// Largest `j` tried in [`v_limit_in_n`] (`n = 2^j`).
pub const LIMIT_CAP: i32 = 1000;
const LN_HUGE: f64 = 13.815510557964274; // ln 1e6
const LN_TINY: f64 = -13.815510557964274;
/// Consecutive monotone steps needed before a trend is accepted.
const TREND_STEPS: usize = 3;

/// Classifies `lim_{n -> inf} v(p, d, n, k)` along `n = 2^j`.
///
/// Infinite once the values exceed `1e6` while increasing over the last
/// three doublings, zero once below `1e-6` while decreasing, finite once two
/// consecutive doublings change `ln v` by at most `tolerance`.
pub fn v_limit_in_n(p: f64, d: f64, k: u64, tolerance: f64) -> Result<Limit> {
    check_pd(p, d)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".to_string()));
    }
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tolerance}")));
    }
    let ln_k = (2.0 - d) * (k as f64).ln();
    let mut history: Vec<f64> = Vec::new();
    for j in 0..=LIMIT_CAP {
        let lv = ln_w(p, d, j as f64 * LN_2, 2f64.powi(-j)) + ln_k;
        history.push(lv);
        let steps: Vec<f64> = history.windows(2).rev().take(TREND_STEPS).map(|w| w[1] - w[0]).collect();
        if steps.len() < TREND_STEPS {
            continue;
        }
        if lv > LN_HUGE && steps.iter().all(|&s| s > 0.0) {
            return Ok(Limit::Infinite);
        }
        if lv < LN_TINY && steps.iter().all(|&s| s < 0.0) {
            return Ok(Limit::Zero);
        }
        if steps[..2].iter().all(|s| s.abs() <= tolerance) {
            return Ok(Limit::Finite(lv.exp()));
        }
    }
    Err(Error::Inconclusive(format!(
        "v({p}, {d}, 2^j, {k}) shows no settled trend up to j = {LIMIT_CAP}"
    )))
}

/// How a covering of the unit diamond is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum CoveringScheme {
    /// `n` tilted diamonds along one diagonal.
    TiltedSplit { n: u64 },
    /// `2^levels` symmetric pieces per side.
    SymmetricSplit { levels: u32 },
}

impl fmt::Display for CoveringScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoveringScheme::TiltedSplit { .. } => write!(f, "tilted"),
            CoveringScheme::SymmetricSplit { .. } => write!(f, "symmetric"),
        }
    }
}

/// Changes of `ln v` per doubling at or below this count as constant.
pub const TREND_EPS: f64 = 1e-8;

/// Sign of a trend, zero meaning constant within [`TREND_EPS`].
fn trend(delta: f64) -> i8 {
    if delta.abs() <= TREND_EPS {
        0
    } else if delta > 0.0 {
        1
    } else {
        -1
    }
}

fn check_levels(max_levels: u32) -> Result<()> {
    if max_levels < 4 {
        return Err(Error::InvalidParameter(format!("maxLevels must be >= 4, got {max_levels}")));
    }
    if max_levels > 62 {
        return Err(Error::InvalidParameter(format!("maxLevels must be <= 62, got {max_levels}")));
    }
    Ok(())
}

/// Trend of the tilted split at the finest level `n = 2^L`, `k = 1`.
fn tilted_trend(p: f64, d: f64, levels: u32) -> Result<i8> {
    let fine = ln_covering_volume_v(p, d, 1 << levels, 1)?;
    let coarse = ln_covering_volume_v(p, d, 1 << (levels - 1), 1)?;
    Ok(trend(fine - coarse))
}

/// Trend of the symmetric refinement `k = 2^L`, `n = 1`.
fn symmetric_trend(p: f64, d: f64, levels: u32) -> Result<i8> {
    let fine = ln_covering_volume_v(p, d, 1, 1 << levels)?;
    let coarse = ln_covering_volume_v(p, d, 1, 1 << (levels - 1))?;
    Ok(trend(fine - coarse))
}

/// Whether the `d`-measure of the unit diamond is finite (possibly zero):
/// either tilted splitting drives the volume down, or symmetric refinement
/// does not drive it up.
fn measure_is_finite(p: f64, d: f64, levels: u32) -> Result<bool> {
    Ok(tilted_trend(p, d, levels)? < 0 || symmetric_trend(p, d, levels)? <= 0)
}

/// Bracket of the trial dimensions.
pub const DIMENSION_BRACKET: (f64, f64) = (0.5, 4.0);

/// `inf { d : nu^d(unit diamond) < inf }` by bisection over `d in [0.5, 4]`.
pub fn dimension_estimate(p: f64, max_levels: u32) -> Result<f64> {
    check_pd(p, 1.0)?;
    check_levels(max_levels)?;
    let (mut lo, mut hi) = DIMENSION_BRACKET;
    if measure_is_finite(p, lo, max_levels)? || !measure_is_finite(p, hi, max_levels)? {
        return Err(Error::Inconclusive(format!(
            "measure finiteness does not change sign on [{lo}, {hi}] for p = {p}"
        )));
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if measure_is_finite(p, mid, max_levels)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Classification of `nu^d` with the covering that realizes it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub p: f64,
    pub d: f64,
    pub classification: Limit,
    /// Scheme that decides the classification.
    pub scheme: CoveringScheme,
    /// Best tilted split on the grid.
    pub n: u64,
    pub levels: u32,
    /// `v` of the best covering at the finest level.
    pub volume_estimate: f64,
}

/// Classifies `nu^d` of the unit diamond.
///
/// `v = k^(2-d) w(n)` factorizes, so the refined measure is
/// `lim_k k^(2-d) inf_n w(n)`: zero when the tilted limit is zero, and
/// otherwise decided by the sign of `2 - d`.
pub fn measure_estimate(p: f64, d: f64, max_levels: u32) -> Result<MeasureEstimate> {
    check_pd(p, d)?;
    check_levels(max_levels)?;
    // a slightly looser tolerance than the trend test, so that d at the end of
    // a dimension bisection still classifies
    let tilted = v_limit_in_n(p, d, 1, 4.0 * TREND_EPS)?;
    let (best_n, best_w) = (0..=max_levels)
        .map(|j| {
            let n = 1u64 << j;
            (n, covering_volume_v(p, d, n, 1).expect("validated parameters"))
        })
        .fold((1, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let k_fine = 1u64 << max_levels;
    let at_fine = |w: f64| w * (k_fine as f64).powf(2.0 - d);
    let (classification, scheme, volume) = match tilted {
        Limit::Zero => {
            let n = 1u64 << max_levels;
            (Limit::Zero, CoveringScheme::TiltedSplit { n }, covering_volume_v(p, d, n, k_fine)?)
        }
        _ => {
            let w = match tilted {
                Limit::Finite(lim) => best_w.min(lim),
                _ => best_w,
            };
            let scheme = CoveringScheme::SymmetricSplit { levels: max_levels };
            match symmetric_trend(p, d, max_levels)? {
                1 => (Limit::Infinite, scheme, at_fine(w)),
                -1 => (Limit::Zero, scheme, at_fine(w)),
                _ => (Limit::Finite(w), scheme, w),
            }
        }
    };
    Ok(MeasureEstimate {
        p,
        d,
        classification,
        scheme,
        n: best_n,
        levels: max_levels,
        volume_estimate: volume,
    })
}

/// `nu_delta` estimate with `delta = 2^-level`: the least covering volume
/// over symmetric refinements `k = 2^l`, `level <= l <= max_levels`, and
/// tilted splits `n = 2^j`, `j <= max_levels`.
///
/// Raising `level` removes admissible coverings, so the estimate never
/// decreases as `delta` shrinks.
pub fn nu_delta_estimate(p: f64, d: f64, level: u32, max_levels: u32) -> Result<f64> {
    check_pd(p, d)?;
    if level > max_levels || max_levels > 62 {
        return Err(Error::InvalidParameter("need level <= maxLevels <= 62".to_string()));
    }
    let mut best = f64::INFINITY;
    for l in level..=max_levels {
        for j in 0..=max_levels {
            best = best.min(covering_volume_v(p, d, 1 << j, 1 << l)?);
        }
    }
    Ok(best)
}

/// CSV with columns `p, d, scheme, n, levels, volume_estimate, classification`.
pub fn measure_csv(rows: &[MeasureEstimate]) -> String {
    let mut out = String::from("p,d,scheme,n,levels,volume_estimate,classification\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_real(r.p),
            fmt_real(r.d),
            r.scheme,
            r.n,
            r.levels,
            fmt_real(r.volume_estimate),
            r.classification
        );
    }
    out
}
