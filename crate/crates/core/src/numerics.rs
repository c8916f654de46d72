//! Deterministic numeric kernel shared by every solver in the crate.
//!
//! Contains an adaptive Gauss–Kronrod integrator with explicit breakpoints,
//! a bracketing root finder for monotone maps, radial profiles with
//! declared tails, L^p distances between such profiles, and a kink-aware
//! tensor cubature for non-radial integrands on boxes.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error(
        "quadrature did not converge after {refinements} refinements \
         (last estimate {last}, previous {previous}, error estimate {error})"
    )]
    Refinement {
        refinements: usize,
        last: f64,
        previous: f64,
        error: f64,
    },
    #[error("root not bracketed: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    Bracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    #[error("invalid radial profile: {0}")]
    InvalidProfile(String),
    #[error("profiles have incompatible extrapolation rules: {0}")]
    DomainMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Absolute/relative accuracy target plus a refinement budget.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_refinements: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, max_refinements: usize) -> Result<Self> {
        let tol = Tolerance {
            abs,
            rel,
            max_refinements,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs >= 0.0) || !(self.rel >= 0.0) {
            return Err(NumericsError::InvalidTolerance(format!(
                "abs = {}, rel = {} must be non-negative",
                self.abs, self.rel
            )));
        }
        if !(self.abs + self.rel > 0.0) {
            return Err(NumericsError::InvalidTolerance(
                "abs + rel must be positive".into(),
            ));
        }
        if self.max_refinements < 1 {
            return Err(NumericsError::InvalidTolerance(
                "max_refinements must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Accepted error for a quantity of magnitude `value`.
    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-13,
            rel: 1e-11,
            max_refinements: 4000,
        }
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel: (Kronrod estimate, |Kronrod − Gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Adaptive integral over `[points[0], points[last]]` with every listed
/// point used as an initial panel boundary.
///
/// The panel with the largest error estimate is halved until the summed
/// error estimate falls below the tolerance target.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<f64> {
    tol.validate()?;
    if points.len() < 2 {
        return Err(NumericsError::InvalidArgument(
            "need at least two integration limits".into(),
        ));
    }
    let mut pts: Vec<f64> = points.to_vec();
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(NumericsError::InvalidArgument(
            "integration limits must be finite".into(),
        ));
    }
    let (lo, hi) = (pts[0], pts[pts.len() - 1]);
    let sign = if hi < lo { -1.0 } else { 1.0 };
    let (lo, hi) = if hi < lo { (hi, lo) } else { (lo, hi) };
    pts.retain(|&p| p >= lo && p <= hi);
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();

    let mut panels: Vec<Panel> = pts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (value, error) = gk15(&f, w[0], w[1]);
            Panel {
                a: w[0],
                b: w[1],
                value,
                error,
            }
        })
        .collect();
    if panels.is_empty() {
        return Ok(0.0);
    }

    let mut previous = f64::NAN;
    let mut refinements = 0usize;
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if !total.is_finite() {
            return Err(NumericsError::Refinement {
                refinements,
                last: total,
                previous,
                error: err,
            });
        }
        if err <= tol.target(total) {
            return Ok(sign * total);
        }
        if refinements >= tol.max_refinements {
            return Err(NumericsError::Refinement {
                refinements,
                last: total,
                previous,
                error: err,
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .unwrap();
        let Panel { a, b, .. } = panels.swap_remove(idx);
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) {
            // Panel can no longer be split in floating point; accept it.
            let (value, _) = gk15(&f, a, b);
            panels.push(Panel {
                a,
                b,
                value,
                error: 0.0,
            });
            refinements += 1;
            continue;
        }
        let (v1, e1) = gk15(&f, a, mid);
        let (v2, e2) = gk15(&f, mid, b);
        panels.push(Panel {
            a,
            b: mid,
            value: v1,
            error: e1,
        });
        panels.push(Panel {
            a: mid,
            b,
            value: v2,
            error: e2,
        });
        previous = total;
        refinements += 1;
    }
}

/// ∫₀^{r_max} f(r)·4πr² dr.
pub fn integrate_radial<F: Fn(f64) -> f64>(f: F, r_max: f64, tol: Tolerance) -> Result<f64> {
    integrate_radial_with_breaks(f, r_max, &[], tol)
}

/// Radial integral with interior breakpoints (kinks, discontinuities).
pub fn integrate_radial_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    r_max: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<f64> {
    if !(r_max > 0.0) {
        return Err(NumericsError::InvalidArgument(format!(
            "r_max = {r_max} must be positive"
        )));
    }
    let mut pts = vec![0.0];
    pts.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < r_max));
    pts.push(r_max);
    integrate_with_breaks(|r| 4.0 * PI * r * r * f(r), &pts, tol)
}

/// Locates sign changes of `g` on `[a, b]` by scanning `samples` uniform
/// cells and bisecting each sign-changing cell to full precision.
pub fn locate_sign_changes<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    let h = (b - a) / n as f64;
    let mut roots = Vec::new();
    let mut x0 = a;
    let mut g0 = g(x0);
    for i in 1..=n {
        let x1 = if i == n { b } else { a + h * i as f64 };
        let g1 = g(x1);
        if g0 == 0.0 {
            roots.push(x0);
        } else if g0 * g1 < 0.0 {
            let (mut lo, mut hi, mut glo) = (x0, x1, g0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if !(mid > lo && mid < hi) {
                    break;
                }
                let gm = g(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if gm * glo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        g0 = g1;
    }
    if g0 == 0.0 && roots.last() != Some(&x0) {
        roots.push(x0);
    }
    roots
}

/// Result of a bracketed root search together with its sign certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// Final bracket; `g` changes sign (or vanishes) across it.
    pub lo: f64,
    pub hi: f64,
    pub g_lo: f64,
    pub g_hi: f64,
    pub iterations: usize,
    /// Set when an interior evaluation fell outside the range spanned by
    /// the bracket values, which a monotone map cannot produce.
    pub monotonicity_warning: bool,
}

/// Root of a continuous monotone `g` on `[lo, hi]`.
///
/// Regula falsi with the Illinois modification, falling back to bisection
/// whenever the bracket fails to halve over two consecutive steps.
pub fn find_root_monotone<G: Fn(f64) -> f64>(
    g: G,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<Root> {
    tol.validate()?;
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut ga = g(a);
    let mut gb = g(b);
    if !ga.is_finite() || !gb.is_finite() || ga * gb > 0.0 {
        return Err(NumericsError::Bracket {
            lo: a,
            hi: b,
            g_lo: ga,
            g_hi: gb,
        });
    }
    let done = |x: f64, a: f64, b: f64| b - a <= tol.rel * x.abs() || b - a <= f64::EPSILON * x.abs();
    if ga == 0.0 {
        return Ok(Root {
            x: a,
            lo: a,
            hi: a,
            g_lo: ga,
            g_hi: ga,
            iterations: 0,
            monotonicity_warning: false,
        });
    }
    if gb == 0.0 {
        return Ok(Root {
            x: b,
            lo: b,
            hi: b,
            g_lo: gb,
            g_hi: gb,
            iterations: 0,
            monotonicity_warning: false,
        });
    }
    let cap = tol.max_refinements.max(400);
    let mut warning = false;
    let mut side = 0i32;
    let mut width = b - a;
    let mut stalled = 0;
    let mut iterations = 0;
    let mut x = 0.5 * (a + b);
    while iterations < cap {
        iterations += 1;
        let secant = (a * gb - b * ga) / (gb - ga);
        x = if stalled >= 2 || !(secant > a && secant < b) {
            stalled = 0;
            0.5 * (a + b)
        } else {
            secant
        };
        let gx = g(x);
        let (gmin, gmax) = if ga < gb { (ga, gb) } else { (gb, ga) };
        if !(gx >= gmin && gx <= gmax) {
            warning = true;
        }
        if gx == 0.0 || gx.abs() <= tol.abs {
            return Ok(Root {
                x,
                lo: a,
                hi: b,
                g_lo: ga,
                g_hi: gb,
                iterations,
                monotonicity_warning: warning,
            });
        }
        if gx * ga < 0.0 {
            b = x;
            gb = gx;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            ga = gx;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
        let new_width = b - a;
        if new_width > 0.5 * width {
            stalled += 1;
        } else {
            stalled = 0;
        }
        width = new_width;
        if done(x, a, b) {
            break;
        }
    }
    // Halved endpoint values are Illinois weights; report true values.
    let (g_lo, g_hi) = (g(a), g(b));
    Ok(Root {
        x: if done(x, a, b) { x } else { 0.5 * (a + b) },
        lo: a,
        hi: b,
        g_lo,
        g_hi,
        iterations,
        monotonicity_warning: warning,
    })
}

/// Grows `hi` geometrically until `g(hi)` has the opposite sign of `g(lo)`.
pub fn expand_bracket<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64, max_steps: usize) -> Option<f64> {
    let glo = g(lo);
    let mut h = hi;
    let step = (hi - lo).max(1e-3);
    let mut k = 1.0;
    for _ in 0..max_steps {
        let gh = g(h);
        if gh.is_finite() && gh * glo <= 0.0 {
            return Some(h);
        }
        k *= 2.0;
        h = lo + step * k;
    }
    None
}

/// Extrapolation rule of a [`RadialProfile`] beyond its last node.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    Zero,
    Constant { value: f64 },
    Linear { slope: f64, intercept: f64 },
}

impl Tail {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Tail::Zero => 0.0,
            Tail::Constant { value } => value,
            Tail::Linear { slope, intercept } => slope * r + intercept,
        }
    }
}

/// Samples of a radial function on strictly increasing radii, linearly
/// interpolated between nodes.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RadialProfile {
    nodes: Vec<f64>,
    values: Vec<f64>,
    tail: Tail,
}

pub const MIN_PROFILE_NODES: usize = 16;

impl RadialProfile {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, tail: Tail) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(NumericsError::InvalidProfile(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.len() < MIN_PROFILE_NODES {
            return Err(NumericsError::InvalidProfile(format!(
                "need at least {MIN_PROFILE_NODES} nodes, got {}",
                nodes.len()
            )));
        }
        if nodes.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(NumericsError::InvalidProfile(
                "nodes must be finite non-negative radii".into(),
            ));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NumericsError::InvalidProfile(
                "nodes must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::InvalidProfile("values must be finite".into()));
        }
        Ok(RadialProfile {
            nodes,
            values,
            tail,
        })
    }

    /// Samples `f` on the given nodes.
    pub fn from_fn<F: Fn(f64) -> f64>(nodes: Vec<f64>, f: F, tail: Tail) -> Result<Self> {
        let values = nodes.iter().map(|&r| f(r)).collect();
        RadialProfile::new(nodes, values, tail)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn last_node(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn eval(&self, r: f64) -> f64 {
        let n = self.nodes.len();
        if r <= self.nodes[0] {
            return self.values[0];
        }
        if r > self.nodes[n - 1] {
            return self.tail.eval(r);
        }
        let i = self.nodes.partition_point(|&x| x < r).max(1);
        let (r0, r1) = (self.nodes[i - 1], self.nodes[i]);
        let t = (r - r0) / (r1 - r0);
        self.values[i - 1] + t * (self.values[i] - self.values[i - 1])
    }

    /// ∫ f(profile(r)) 4πr² dr over the node range, exact panel boundaries
    /// at every node.
    pub fn integrate_map<F: Fn(f64, f64) -> f64>(&self, f: F, tol: Tolerance) -> Result<f64> {
        let mut total = 0.0;
        for w in self.nodes.windows(2) {
            total += integrate(|r| 4.0 * PI * r * r * f(r, self.eval(r)), w[0], w[1], tol)?;
        }
        Ok(total)
    }
}

/// `n` uniformly spaced points on `[a, b]` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
                .collect()
        }
    }
}

/// (∫|f − g|^p 4πr² dr)^{1/p} over the union of the two node ranges.
///
/// Beyond the union the profiles follow their tails; the distance is only
/// finite there if both tails vanish or coincide exactly.
pub fn lp_distance(f: &RadialProfile, g: &RadialProfile, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(NumericsError::InvalidArgument(format!(
            "p = {p} must be a finite real >= 1"
        )));
    }
    let compatible = matches!((f.tail, g.tail), (Tail::Zero, Tail::Zero)) || f.tail == g.tail;
    if !compatible {
        return Err(NumericsError::DomainMismatch(format!(
            "{:?} vs {:?}",
            f.tail, g.tail
        )));
    }
    let mut knots: Vec<f64> = f.nodes.iter().chain(g.nodes.iter()).copied().collect();
    knots.push(0.0);
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup();
    let tol = Tolerance::new(1e-15, 1e-12, 200).unwrap();
    let diff = |r: f64| f.eval(r) - g.eval(r);
    let mut total = 0.0;
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (da, db) = (diff(a), diff(b));
        let piece = |r: f64| 4.0 * PI * r * r * diff(r).abs().powf(p);
        // The difference is linear on each knot interval; split at its zero.
        if da * db < 0.0 {
            let z = a + (b - a) * da / (da - db);
            total += integrate_with_breaks(piece, &[a, z, b], tol)?;
        } else {
            total += integrate(piece, a, b, tol)?;
        }
    }
    Ok(total.powf(1.0 / p))
}

const GL3_X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Kink-aware cubature of `f` over the box `[lo, hi]`.
///
/// The box is tiled into `cells³` cells, each integrated with a 3×3×3
/// Gauss–Legendre rule. A cell whose corner and centre values of `level`
/// change sign is split into octants, recursively up to `max_depth`, so
/// that the kink of `f` along `{level = 0}` is confined to small cells.
pub fn integrate_box_kink_aware<F, L>(
    f: &F,
    level: Option<&L>,
    lo: [f64; 3],
    hi: [f64; 3],
    cells: usize,
    max_depth: u32,
) -> f64
where
    F: Fn([f64; 3]) -> f64,
    L: Fn([f64; 3]) -> f64,
{
    let n = cells.max(1);
    let h = [
        (hi[0] - lo[0]) / n as f64,
        (hi[1] - lo[1]) / n as f64,
        (hi[2] - lo[2]) / n as f64,
    ];
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let a = [
                    lo[0] + h[0] * i as f64,
                    lo[1] + h[1] * j as f64,
                    lo[2] + h[2] * k as f64,
                ];
                let b = [a[0] + h[0], a[1] + h[1], a[2] + h[2]];
                total += cell_integral(f, level, a, b, max_depth);
            }
        }
    }
    total
}

fn cell_integral<F, L>(f: &F, level: Option<&L>, a: [f64; 3], b: [f64; 3], depth: u32) -> f64
where
    F: Fn([f64; 3]) -> f64,
    L: Fn([f64; 3]) -> f64,
{
    if depth > 0 {
        if let Some(level) = level {
            let mut pos = false;
            let mut neg = false;
            for corner in 0..8 {
                let x = [
                    if corner & 1 == 0 { a[0] } else { b[0] },
                    if corner & 2 == 0 { a[1] } else { b[1] },
                    if corner & 4 == 0 { a[2] } else { b[2] },
                ];
                let v = level(x);
                pos |= v > 0.0;
                neg |= v <= 0.0;
            }
            let c = [
                0.5 * (a[0] + b[0]),
                0.5 * (a[1] + b[1]),
                0.5 * (a[2] + b[2]),
            ];
            let v = level(c);
            pos |= v > 0.0;
            neg |= v <= 0.0;
            if pos && neg {
                let mut sum = 0.0;
                for octant in 0..8 {
                    let (mut oa, mut ob) = (a, b);
                    for d in 0..3 {
                        if octant & (1 << d) == 0 {
                            ob[d] = c[d];
                        } else {
                            oa[d] = c[d];
                        }
                    }
                    sum += cell_integral(f, Some(level), oa, ob, depth - 1);
                }
                return sum;
            }
        }
    }
    let half = [
        0.5 * (b[0] - a[0]),
        0.5 * (b[1] - a[1]),
        0.5 * (b[2] - a[2]),
    ];
    let mid = [
        0.5 * (a[0] + b[0]),
        0.5 * (a[1] + b[1]),
        0.5 * (a[2] + b[2]),
    ];
    let mut sum = 0.0;
    for (xi, wi) in GL3_X.iter().zip(GL3_W) {
        for (yj, wj) in GL3_X.iter().zip(GL3_W) {
            for (zk, wk) in GL3_X.iter().zip(GL3_W) {
                let x = [
                    mid[0] + half[0] * xi,
                    mid[1] + half[1] * yj,
                    mid[2] + half[2] * zk,
                ];
                sum += wi * wj * wk * f(x);
            }
        }
    }
    sum * half[0] * half[1] * half[2]
}

/// Iterated adaptive integral of `f` over the box `[-h, h]` (h per axis).
///
/// The innermost (z) integral splits at the points returned by
/// `z_breaks(x, y)`, which is where callers report kinks of the integrand.
pub fn integrate_box_nested<F, K>(f: &F, half: [f64; 3], z_breaks: &K, tol: Tolerance) -> Result<f64>
where
    F: Fn([f64; 3]) -> f64,
    K: Fn(f64, f64) -> Vec<f64>,
{
    let failure: std::cell::RefCell<Option<NumericsError>> = std::cell::RefCell::new(None);
    let inner_tol = Tolerance {
        abs: tol.abs * 1e-2,
        rel: tol.rel * 1e-2,
        max_refinements: tol.max_refinements,
    };
    let mid_tol = Tolerance {
        abs: tol.abs * 1e-1,
        rel: tol.rel * 1e-1,
        max_refinements: tol.max_refinements,
    };
    let record = |e: NumericsError| {
        let mut slot = failure.borrow_mut();
        if slot.is_none() {
            *slot = Some(e);
        }
        0.0
    };
    let inner = |x: f64, y: f64| {
        let mut pts = vec![-half[2]];
        pts.extend(z_breaks(x, y).into_iter().filter(|z| z.abs() < half[2]));
        pts.push(half[2]);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        integrate_with_breaks(|z| f([x, y, z]), &pts, inner_tol).unwrap_or_else(record)
    };
    let middle = |x: f64| integrate(|y| inner(x, y), -half[1], half[1], mid_tol).unwrap_or_else(record);
    let total = integrate(middle, -half[0], half[0], tol)?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Composite Simpson rule on uniformly spaced samples (odd count).
pub fn simpson_uniform(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    if n % 2 == 0 {
        // Even sample count: Simpson on the first n-1, trapezoid on the last panel.
        return simpson_uniform(&values[..n - 1], h) + 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    let mut s = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

/// Ordinary least-squares slope and intercept of `ys` against `xs`.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tight() -> Tolerance {
        Tolerance::new(1e-14, 1e-12, 4000).unwrap()
    }

    #[test]
    fn unit_ball_volume() {
        let v = integrate_radial(|_| 1.0, 1.0, tight()).unwrap();
        assert_relative_eq!(v, 4.0 * PI / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn monomial_radial_integral() {
        let v = integrate_radial(|r| r * r, 1.0, tight()).unwrap();
        assert_relative_eq!(v, 4.0 * PI / 5.0, max_relative = 1e-13);
    }

    #[test]
    fn kinked_normalization_integral() {
        let lambda = 24f64.powf(1.0 / 3.0);
        let f = |r: f64| (lambda - r * r).max(0.0).powf(1.5) / (3.0 * PI * PI);
        let v = integrate_radial(f, lambda.sqrt(), tight()).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn breakpoint_restores_accuracy_past_a_kink() {
        let f = |x: f64| (x - 0.3).abs();
        let v = integrate_with_breaks(f, &[0.0, 0.3, 1.0], tight()).unwrap();
        assert_relative_eq!(v, 0.5 * 0.09 + 0.5 * 0.49, max_relative = 1e-14);
    }

    #[test]
    fn refinement_failure_carries_estimates() {
        let tol = Tolerance::new(0.0, 1e-15, 2).unwrap();
        let err = integrate(|x: f64| x.sqrt().recip(), 0.0, 1.0, tol).unwrap_err();
        match err {
            NumericsError::Refinement { refinements, last, previous, .. } => {
                assert_eq!(refinements, 2);
                assert!(last.is_finite() && previous.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tolerance_rejects_zero_targets() {
        assert!(Tolerance::new(0.0, 0.0, 10).is_err());
        assert!(Tolerance::new(1e-3, 0.0, 0).is_err());
        assert!(Tolerance::new(-1.0, 1.0, 10).is_err());
    }

    #[test]
    fn linear_root() {
        let r = find_root_monotone(|x| x - 2.0, 0.0, 5.0, tight()).unwrap();
        assert_relative_eq!(r.x, 2.0, max_relative = 1e-12);
        assert!(!r.monotonicity_warning);
    }

    #[test]
    fn cube_root_of_24() {
        let r = find_root_monotone(|x| x * x * x - 24.0, 1.0, 5.0, tight()).unwrap();
        assert_relative_eq!(r.x, 2.884_499_140_614_816_5, max_relative = 1e-11);
        assert!(r.g_lo * r.g_hi <= 0.0);
    }

    #[test]
    fn root_bracket_error() {
        let err = find_root_monotone(|x| x * x + 1.0, -1.0, 1.0, tight()).unwrap_err();
        assert!(matches!(err, NumericsError::Bracket { .. }));
    }

    #[test]
    fn non_monotone_map_raises_warning() {
        // Sign change bracketed, but the map dips far below g(lo) inside.
        let g = |x: f64| if x < 0.6 { -10.0 * (x - 0.3).powi(2) - 0.1 } else { x - 0.6 };
        let r = find_root_monotone(g, 0.0, 1.0, tight()).unwrap();
        assert!(r.monotonicity_warning);
    }

    #[test]
    fn sign_scan_finds_all_crossings() {
        let roots = locate_sign_changes(|x: f64| (x * PI).sin(), 0.5, 3.5, 50);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r - e).abs() < 1e-12);
        }
    }

    fn step_profile(value: f64) -> RadialProfile {
        let nodes = linspace(0.0, 1.0, 64);
        RadialProfile::new(nodes.clone(), vec![value; nodes.len()], Tail::Zero).unwrap()
    }

    #[test]
    fn lp_identity_is_zero() {
        let f = step_profile(1.0);
        assert_eq!(lp_distance(&f, &f, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn lp_unit_ball_values() {
        let f = step_profile(1.0);
        let g = step_profile(0.0);
        assert_relative_eq!(lp_distance(&f, &g, 1.0).unwrap(), 4.0 * PI / 3.0, max_relative = 1e-12);
        assert_relative_eq!(
            lp_distance(&f, &g, 5.0 / 3.0).unwrap(),
            (4.0 * PI / 3.0f64).powf(0.6),
            max_relative = 1e-12
        );
    }

    #[test]
    fn lp_rejects_incompatible_tails() {
        let f = step_profile(1.0);
        let nodes = linspace(0.0, 1.0, 64);
        let g = RadialProfile::new(nodes.clone(), vec![1.0; 64], Tail::Constant { value: 1.0 }).unwrap();
        assert!(matches!(lp_distance(&f, &g, 1.0), Err(NumericsError::DomainMismatch(_))));
    }

    #[test]
    fn profile_validation() {
        assert!(RadialProfile::new(linspace(0.0, 1.0, 8), vec![0.0; 8], Tail::Zero).is_err());
        let mut nodes = linspace(0.0, 1.0, 20);
        nodes[5] = nodes[4];
        assert!(RadialProfile::new(nodes, vec![0.0; 20], Tail::Zero).is_err());
        let mut vals = vec![0.0; 20];
        vals[3] = f64::NAN;
        assert!(RadialProfile::new(linspace(0.0, 1.0, 20), vals, Tail::Zero).is_err());
    }

    #[test]
    fn box_cubature_resolves_ball_volume() {
        let inside = |x: [f64; 3]| if x[0] * x[0] + x[1] * x[1] + x[2] * x[2] <= 1.0 { 1.0 } else { 0.0 };
        let level = |x: [f64; 3]| x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 1.0;
        let v = integrate_box_kink_aware(&inside, Some(&level), [-1.0; 3], [1.0; 3], 16, 4);
        assert!((v - 4.0 * PI / 3.0).abs() < 2e-3, "{v}");
    }

    #[test]
    fn nested_box_integral_of_ellipsoid() {
        // Volume of x² + 4y² + 9z² <= 1 is 4π/(3·6).
        let g = |p: [f64; 3]| 1.0 - p[0] * p[0] - 4.0 * p[1] * p[1] - 9.0 * p[2] * p[2];
        let f = |p: [f64; 3]| g(p).max(0.0).powf(1.5);
        let breaks = |x: f64, y: f64| locate_sign_changes(|z| g([x, y, z]), -1.0 / 3.0, 1.0 / 3.0, 16);
        let tol = Tolerance::new(1e-12, 1e-7, 4000).unwrap();
        let v = integrate_box_nested(&f, [1.0, 0.5, 1.0 / 3.0], &breaks, tol).unwrap();
        // ∫(1-|u|²)^{3/2} over the unit ball is π²/8; Jacobian 1/6.
        assert!((v - PI * PI / 48.0).abs() < 1e-7, "{v}");
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let xs = linspace(0.0, 2.0, 11);
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x - x).collect();
        assert_relative_eq!(simpson_uniform(&ys, 0.2), 4.0 - 2.0, max_relative = 1e-13);
    }
}
