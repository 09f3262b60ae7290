//! Lorentzian Gromov-Hausdorff distance between finite nets.
//!
//! `d_GH(X, Y) = 1/2 inf dist(R)` over correspondences `R`, where
//! `dist(R) = max |tau_X(x, x') - tau_Y(y, y')|` is taken with the
//! antisymmetric (signed) separation. Small instances are solved exactly;
//! larger ones get a local-search upper bound and a lower bound from the
//! metric GH distance of the Noldus metrics.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{fmt_real, grid_mesh, sample_net, FiniteNet};
use crate::noldus::{self, MetricNet};
use crate::space::{lift_minimal_delta, Chart, Event, Exponent, SpaceDescriptor};

/// Largest `|X| * |Y|` handled by [`gh_exact_small`].
pub const EXACT_LIMIT: usize = 20;

/// A relation between the index sets of two nets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn identity(n: usize) -> Self {
        Correspondence { pairs: (0..n).map(|i| (i, i)).collect() }
    }

    /// `{(x, f(x))} ∪ {(g(y), y)}`.
    pub fn from_maps(f: &[usize], g: &[usize]) -> Self {
        let mut pairs: Vec<(usize, usize)> = f.iter().enumerate().map(|(x, &y)| (x, y)).collect();
        pairs.extend(g.iter().enumerate().map(|(y, &x)| (x, y)));
        pairs.sort_unstable();
        pairs.dedup();
        Correspondence { pairs }
    }

    /// Both projections must be onto.
    pub fn validate(&self, nx: usize, ny: usize) -> Result<()> {
        let mut hit_x = vec![false; nx];
        let mut hit_y = vec![false; ny];
        for &(i, j) in &self.pairs {
            if i >= nx || j >= ny {
                return Err(Error::Precondition(format!("pair ({i}, {j}) out of range")));
            }
            hit_x[i] = true;
            hit_y[j] = true;
        }
        if hit_x.iter().all(|&h| h) && hit_y.iter().all(|&h| h) {
            Ok(())
        } else {
            Err(Error::Precondition("correspondence projections are not surjective".to_string()))
        }
    }
}

fn require_lorentzian(nets: [&FiniteNet; 2]) -> Result<()> {
    if nets.iter().all(|n| n.space().is_lorentzian()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("GH distances need Lorentzian nets".to_string()))
    }
}

/// `max |tau_X(i, i') - tau_Y(j, j')|` over pairs of pairs, signed `tau`.
pub fn distortion(r: &Correspondence, nx: &FiniteNet, ny: &FiniteNet) -> Result<f64> {
    require_lorentzian([nx, ny])?;
    r.validate(nx.len(), ny.len())?;
    let mut worst = 0.0f64;
    for (a, &(i, j)) in r.pairs.iter().enumerate() {
        for &(i2, j2) in &r.pairs[a + 1..] {
            worst = worst.max((nx.signed(i, i2) - ny.signed(j, j2)).abs());
        }
    }
    Ok(worst)
}

/// `(1 - phi^p)^(1/p)`, i.e. `tau^p` of the unit-time displacement with
/// spatial part `phi`.
fn unit_profile(p: Exponent, phi: f64) -> f64 {
    match p {
        Exponent::Infinite => 1.0,
        Exponent::Finite(_) if phi <= 0.0 => 1.0,
        Exponent::Finite(p) => ((-(p * phi.ln()).exp_m1()).ln() / p).exp(),
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

/// Half of `sup_{phi in (0,1)} |(1 - phi^p)^(1/p) - (1 - phi^q)^(1/q)|`, the
/// distortion of the identity between `Cyl^p` and `Cyl^q`; an upper bound
/// for their GH distance.
///
/// The supremum is located on a grid that is uniform on `(0, 1)` and
/// geometric towards `phi = 1`, then refined by golden-section search.
pub fn gh_identity_upper_cyl(p: Exponent, q: Exponent) -> f64 {
    match (p, q) {
        _ if p == q => return 0.0,
        // the finite profile tends to 0 at phi -> 1 while tau^inf stays 1
        (Exponent::Infinite, _) | (_, Exponent::Infinite) => return 0.5,
        _ => {}
    }
    let h = |phi: f64| (unit_profile(p, phi) - unit_profile(q, phi)).abs();
    const N: usize = 4096;
    let mut grid: Vec<f64> = (1..N).map(|i| i as f64 / N as f64).collect();
    grid.extend((13..=52).map(|j| 1.0 - 2f64.powi(-j)));
    grid.sort_by(f64::total_cmp);
    let (best_i, best) = grid
        .iter()
        .map(|&phi| h(phi))
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let lo = if best_i == 0 { 0.0 } else { grid[best_i - 1] };
    let hi = grid.get(best_i + 1).copied().unwrap_or(1.0);
    0.5 * best.max(golden_max(h, lo, hi))
}

/// Exact `d_GH` by enumerating relations with pruning on partial distortion.
pub fn gh_exact_small(nx: &FiniteNet, ny: &FiniteNet) -> Result<f64> {
    require_lorentzian([nx, ny])?;
    let (n, m) = (nx.len(), ny.len());
    if n * m > EXACT_LIMIT {
        return Err(Error::TooLarge { size: n * m, limit: EXACT_LIMIT });
    }
    if n == 0 || m == 0 {
        return if n == m {
            Ok(0.0)
        } else {
            Err(Error::Precondition("no correspondence with an empty net".to_string()))
        };
    }
    struct Search<'a> {
        nx: &'a FiniteNet,
        ny: &'a FiniteNet,
        m: usize,
        n: usize,
        chosen: Vec<(usize, usize)>,
        row_hit: Vec<bool>,
        col_hits: Vec<u32>,
        best: f64,
    }
    impl Search<'_> {
        fn go(&mut self, k: usize, current: f64) {
            if k == self.n * self.m {
                self.best = self.best.min(current);
                return;
            }
            let (i, j) = (k / self.m, k % self.m);
            // exclude (i, j) if row i and column j can still be covered
            let row_ok = j + 1 < self.m || self.row_hit[i];
            let col_ok = i + 1 < self.n || self.col_hits[j] > 0;
            if row_ok && col_ok {
                self.go(k + 1, current);
            }
            let mut worst = current;
            for &(i2, j2) in &self.chosen {
                worst = worst.max((self.nx.signed(i, i2) - self.ny.signed(j, j2)).abs());
                if worst >= self.best {
                    return;
                }
            }
            let was_hit = self.row_hit[i];
            self.chosen.push((i, j));
            self.row_hit[i] = true;
            self.col_hits[j] += 1;
            self.go(k + 1, worst);
            self.col_hits[j] -= 1;
            self.row_hit[i] = was_hit;
            self.chosen.pop();
        }
    }
    let mut s = Search {
        nx,
        ny,
        m,
        n,
        chosen: Vec::new(),
        row_hit: vec![false; n],
        col_hits: vec![0; m],
        best: f64::INFINITY,
    };
    s.go(0, 0.0);
    Ok(0.5 * s.best)
}

fn spatial_gap(a: &Event, b: &Event) -> f64 {
    match (a.chart(), b.chart()) {
        (Chart::Cylinder { circumference: c1 }, Chart::Cylinder { circumference: c2 }) if c1 == c2 => {
            lift_minimal_delta(a, b, c1)
        }
        _ => (a.x() - b.x()).abs(),
    }
}

fn nearest_by_time(from: &Event, to: &[Event]) -> usize {
    let key = |e: &Event| ((from.t() - e.t()).abs(), spatial_gap(from, e));
    (0..to.len())
        .min_by(|&a, &b| {
            let (ka, kb) = (key(&to[a]), key(&to[b]));
            ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
        })
        .expect("nonempty net")
}

/// Local search state: the correspondence `{(x, f(x))} ∪ {(g(y), y)}` as a
/// list of `|X| + |Y|` pairs with its pairwise distortion matrix.
struct Relation<'a> {
    nx: &'a FiniteNet,
    ny: &'a FiniteNet,
    pairs: Vec<(usize, usize)>,
    d: Vec<f64>,
}

impl<'a> Relation<'a> {
    fn new(nx: &'a FiniteNet, ny: &'a FiniteNet, f: &[usize], g: &[usize]) -> Self {
        let mut pairs: Vec<(usize, usize)> = f.iter().enumerate().map(|(x, &y)| (x, y)).collect();
        pairs.extend(g.iter().enumerate().map(|(y, &x)| (x, y)));
        let mut r = Relation { nx, ny, pairs, d: Vec::new() };
        r.refresh();
        r
    }

    fn len(&self) -> usize {
        self.pairs.len()
    }

    fn cost(&self, a: (usize, usize), b: (usize, usize)) -> f64 {
        (self.nx.signed(a.0, b.0) - self.ny.signed(a.1, b.1)).abs()
    }

    fn refresh(&mut self) {
        let l = self.len();
        self.d = vec![0.0; l * l];
        for a in 0..l {
            for b in 0..l {
                self.d[a * l + b] = self.cost(self.pairs[a], self.pairs[b]);
            }
        }
    }

    fn objective(&self) -> (f64, f64) {
        let max = self.d.iter().copied().fold(0.0, f64::max);
        let ss = self.d.iter().map(|v| v * v).sum();
        (max, ss)
    }

    /// Best single-pair replacement, if it improves `(max, sum of squares)`
    /// lexicographically.
    fn best_move(&self, current: (f64, f64)) -> Option<(usize, (usize, usize), (f64, f64))> {
        let l = self.len();
        let (n, m) = (self.nx.len(), self.ny.len());
        // top two row entries and the column of the largest
        let tops: Vec<(f64, usize, f64)> = (0..l)
            .map(|a| {
                let row = &self.d[a * l..(a + 1) * l];
                let mut t = (f64::NEG_INFINITY, usize::MAX, f64::NEG_INFINITY);
                for (b, &v) in row.iter().enumerate() {
                    if v > t.0 {
                        t = (v, b, t.0);
                    } else if v > t.2 {
                        t.2 = v;
                    }
                }
                t
            })
            .collect();
        let mut best: Option<(usize, (usize, usize), (f64, f64))> = None;
        let mut best_obj = current;
        for k in 0..l {
            let rest_max = (0..l)
                .filter(|&a| a != k)
                .map(|a| if tops[a].1 == k { tops[a].2 } else { tops[a].0 })
                .fold(0.0, f64::max);
            if rest_max > best_obj.0 {
                continue;
            }
            let old_ss: f64 = (0..l).filter(|&a| a != k).map(|a| self.d[k * l + a].powi(2)).sum();
            let candidates: Box<dyn Iterator<Item = (usize, usize)>> = if k < n {
                Box::new((0..m).map(move |y| (k, y)))
            } else {
                let y = k - n;
                Box::new((0..n).map(move |x| (x, y)))
            };
            for cand in candidates {
                if cand == self.pairs[k] {
                    continue;
                }
                let mut worst = rest_max;
                let mut ss = 0.0;
                for a in (0..l).filter(|&a| a != k) {
                    let c = self.cost(cand, self.pairs[a]);
                    worst = worst.max(c);
                    ss += c * c;
                }
                let obj = (worst, current.1 + 2.0 * (ss - old_ss));
                let better = obj.0 < best_obj.0
                    || (obj.0 == best_obj.0 && obj.1 < best_obj.1 - 1e-12 * (1.0 + best_obj.1.abs()));
                if better {
                    best_obj = obj;
                    best = Some((k, cand, obj));
                }
            }
        }
        best
    }

    fn descend(&mut self) -> f64 {
        let mut obj = self.objective();
        while let Some((k, cand, _)) = self.best_move(obj) {
            self.pairs[k] = cand;
            self.refresh();
            obj = self.objective();
        }
        obj.0
    }

    fn correspondence(&self) -> Correspondence {
        let mut pairs = self.pairs.clone();
        pairs.sort_unstable();
        pairs.dedup();
        Correspondence { pairs }
    }
}

/// Result of [`gh_local_search_detailed`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Half the distortion of `correspondence`.
    pub value: f64,
    pub correspondence: Correspondence,
}

/// Upper bound on `d_GH` by steepest descent over correspondences.
///
/// Correspondences are parametrized by maps `f: X -> Y`, `g: Y -> X`; every
/// minimal correspondence has this form. Moves reassign one image; ties in
/// the distortion are broken by the sum of squared pair distortions.
/// Restart 0 starts from nearest-time matching (the identity on identical
/// nets), the others from random maps drawn from a per-restart stream of a
/// ChaCha8 generator, so the result does not depend on the thread count.
pub fn gh_local_search_detailed(
    nx: &FiniteNet,
    ny: &FiniteNet,
    restarts: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    require_lorentzian([nx, ny])?;
    let (n, m) = (nx.len(), ny.len());
    if n == 0 || m == 0 {
        return if n == m {
            Ok(SearchOutcome { value: 0.0, correspondence: Correspondence { pairs: Vec::new() } })
        } else {
            Err(Error::Precondition("no correspondence with an empty net".to_string()))
        };
    }
    let restarts = restarts.max(1);
    let best = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let (f, g): (Vec<usize>, Vec<usize>) = if r == 0 {
                (
                    nx.points().iter().map(|e| nearest_by_time(e, ny.points())).collect(),
                    ny.points().iter().map(|e| nearest_by_time(e, nx.points())).collect(),
                )
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                (
                    (0..n).map(|_| rng.gen_range(0..m)).collect(),
                    (0..m).map(|_| rng.gen_range(0..n)).collect(),
                )
            };
            let mut rel = Relation::new(nx, ny, &f, &g);
            let value = rel.descend();
            (value, r, rel.correspondence())
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one restart");
    Ok(SearchOutcome { value: 0.5 * best.0, correspondence: best.2 })
}

/// Value of [`gh_local_search_detailed`].
pub fn gh_local_search(nx: &FiniteNet, ny: &FiniteNet, restarts: usize, seed: u64) -> Result<f64> {
    gh_local_search_detailed(nx, ny, restarts, seed).map(|o| o.value)
}

fn distinct_distances(m: &MetricNet) -> Vec<f64> {
    let mut d = Vec::new();
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            d.push(m.dist(i, j));
        }
    }
    d.sort_by(f64::total_cmp);
    d.dedup();
    d
}

fn subsample(values: &[f64], cap: usize) -> Vec<f64> {
    if values.len() <= cap {
        return values.to_vec();
    }
    (0..cap).map(|i| values[i * (values.len() - 1) / (cap - 1)]).collect()
}

/// Covering obstruction: if `cov_A(r) < pack_B(s)` with `s = r + 2 eps`,
/// any correspondence of metric distortion `< 2 eps` would map an `r`-cover
/// of `A` to an `s`-cover of `B`, so `d_GH(A, B) >= eps`.
///
/// `cov` is the greedy covering count (an upper bound) and `pack` a greedy
/// packing with pairwise distances above `2s` (a lower bound), so every
/// reported obstruction is sound.
fn covering_obstruction(a: &MetricNet, b: &MetricNet) -> f64 {
    let da = distinct_distances(a);
    let db = distinct_distances(b);
    let mut radii = vec![f64::MIN_POSITIVE];
    radii.extend(subsample(&da, 24).into_iter().filter(|&r| r > 0.0));
    let mut seps = vec![0.0];
    seps.extend(subsample(&db, 48));
    seps.dedup();
    let mut bound = 0.0f64;
    for &r in &radii {
        let cov = noldus::covering_number(a, r).expect("positive radius");
        for &g in &seps {
            // a packing above g is also one above anything below the next distance
            let Some(&next) = db.iter().find(|&&d| d > g) else { continue };
            if next - 2.0 * r <= 4.0 * bound {
                continue;
            }
            if noldus::packing_number(b, g) > cov {
                bound = bound.max((next - 2.0 * r) / 4.0);
            }
        }
    }
    bound
}

/// Lower bound on the metric GH distance of two metric nets.
pub fn metric_gh_lower(a: &MetricNet, b: &MetricNet) -> f64 {
    let diam = 0.5 * (a.diameter() - b.diameter()).abs();
    diam.max(covering_obstruction(a, b)).max(covering_obstruction(b, a))
}

/// Half the metric GH lower bound of the Noldus metric nets.
///
/// A correspondence of `tau`-distortion `delta` has Noldus distortion at most
/// `2 delta` (clipping the signed separation at 0 is 1-Lipschitz), hence
/// `d_GH >= d_GH(Noldus) / 2`.
pub fn gh_lower_noldus(nx: &FiniteNet, ny: &FiniteNet) -> Result<f64> {
    let (a, b) = (noldus::noldus_metric_net(nx)?, noldus::noldus_metric_net(ny)?);
    Ok(0.5 * metric_gh_lower(&a, &b))
}

/// Parameters of [`p_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepConfig {
    pub p_list: Vec<Exponent>,
    /// Compare every entry against this exponent instead of its successor.
    pub reference: Option<Exponent>,
    pub n_t: usize,
    pub n_x: usize,
    pub height: f64,
    pub circumference: f64,
    pub restarts: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: Exponent,
    pub q: Exponent,
    pub upper_closed: f64,
    pub upper_search: f64,
    pub lower_noldus: f64,
    pub mesh_t: f64,
    pub mesh_x: f64,
}

fn exponent_key(e: Exponent) -> f64 {
    e.value().unwrap_or(f64::INFINITY)
}

/// GH bounds between `Cyl^p` and `Cyl^q` for consecutive entries of the
/// list, or for every entry against a fixed reference.
pub fn p_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.p_list.windows(2).any(|w| exponent_key(w[0]) > exponent_key(w[1])) {
        return Err(Error::InvalidParameter("p list must be sorted".to_string()));
    }
    let pairs: Vec<(Exponent, Exponent)> = match cfg.reference {
        Some(r) => cfg.p_list.iter().map(|&p| (r, p)).collect(),
        None => cfg.p_list.windows(2).map(|w| (w[0], w[1])).collect(),
    };
    let cyl = |p| SpaceDescriptor::cylinder_with(p, cfg.height, cfg.circumference);
    let (mesh_t, mesh_x) = grid_mesh(&cyl(Exponent::Finite(2.0))?, cfg.n_t, cfg.n_x)
        .ok_or_else(|| Error::InvalidParameter("nT must be >= 2 and nX >= 1".to_string()))?;
    pairs
        .into_iter()
        .map(|(p, q)| {
            let nx = sample_net(&cyl(p)?, cfg.n_t, cfg.n_x)?;
            let ny = sample_net(&cyl(q)?, cfg.n_t, cfg.n_x)?;
            Ok(SweepRow {
                p,
                q,
                upper_closed: gh_identity_upper_cyl(p, q),
                upper_search: gh_local_search(&nx, &ny, cfg.restarts, cfg.seed)?,
                lower_noldus: gh_lower_noldus(&nx, &ny)?,
                mesh_t,
                mesh_x,
            })
        })
        .collect()
}

/// CSV with columns `p, q, upper_closed, upper_search, lower_noldus, mesh_t, mesh_x`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("p,q,upper_closed,upper_search,lower_noldus,mesh_t,mesh_x\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.p,
            r.q,
            fmt_real(r.upper_closed),
            fmt_real(r.upper_search),
            fmt_real(r.lower_noldus),
            fmt_real(r.mesh_t),
            fmt_real(r.mesh_x)
        );
    }
    out
}
