//! Quantum spectra for the semiclassical comparison: analytic oscillator
//! catalogs, one-dimensional finite differences, spectral counting, Weyl
//! error scans, free ground-state densities and coherent-state identities.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, NumericsError, RadialProfile, Tail, Tolerance};
use crate::potentials::{make_potential, PotentialSpec};
use crate::semiclassics::{self, SemiclassicsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("level {lambda} lies beyond the catalog truncation {lambda_max}")]
    Truncation { lambda: f64, lambda_max: f64 },
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("shell index {shell} exceeds the supported recurrence depth {max}")]
    Depth { shell: usize, max: usize },
    #[error("grid too coarse: {0}")]
    Resolution(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Semiclassics(#[from] SemiclassicsError),
}

pub type Result<T> = std::result::Result<T, SpectraError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    AnalyticHarmonic3d,
    FiniteDifference1d,
}

/// Grid, potential samples and eigenvectors behind a finite-difference
/// catalog. Eigenvectors satisfy `Σ ψ_i² dx = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdStates {
    pub grid: Vec<f64>,
    pub dx: f64,
    pub potential: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Eigenvalues of `−ℏ²Δ + V` below `lambda_max`, sorted, with degeneracies.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCatalog {
    pub hbar: f64,
    pub levels: Vec<Level>,
    pub provenance: Provenance,
    pub lambda_max: f64,
    /// |λ_k(h) − λ_k(h/2)| per level (finite-difference catalogs only).
    pub refinement_shift: Vec<f64>,
    pub states: Option<FdStates>,
}

impl SpectralCatalog {
    pub fn size(&self) -> u64 {
        self.levels.iter().map(|l| l.degeneracy).sum()
    }
}

/// Levels `offset + ℏ(2n + 3)` with degeneracy `(n+1)(n+2)/2`, up to
/// `lambda_max` inclusive.
pub fn harmonic_catalog(hbar: f64, lambda_max: f64, offset: f64) -> Result<SpectralCatalog> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(SpectraError::InvalidArgument(format!("hbar = {hbar} must be positive")));
    }
    if !(lambda_max > offset) || !lambda_max.is_finite() {
        return Err(SpectraError::InvalidArgument(format!(
            "lambda_max = {lambda_max} must exceed offset {offset}"
        )));
    }
    let mut levels = Vec::new();
    let mut n = 0u64;
    loop {
        let e = offset + hbar * (2 * n + 3) as f64;
        if e > lambda_max {
            break;
        }
        levels.push(Level {
            energy: e,
            degeneracy: (n + 1) * (n + 2) / 2,
        });
        n += 1;
    }
    Ok(SpectralCatalog {
        hbar,
        levels,
        provenance: Provenance::AnalyticHarmonic3d,
        lambda_max,
        refinement_shift: Vec::new(),
        states: None,
    })
}

/// `N^q(Λ) = #{λ_n ≤ Λ}` and `E^q(Λ) = Σ_{λ_n ≤ Λ} λ_n`, with multiplicity.
pub fn spectral_counts(catalog: &SpectralCatalog, lambda: f64) -> Result<(u64, f64)> {
    if lambda > catalog.lambda_max {
        return Err(SpectraError::Truncation {
            lambda,
            lambda_max: catalog.lambda_max,
        });
    }
    let mut n = 0u64;
    let mut e = 0.0;
    for l in catalog.levels.iter().take_while(|l| l.energy <= lambda) {
        n += l.degeneracy;
        e += l.energy * l.degeneracy as f64;
    }
    Ok((n, e))
}

/// One-dimensional trap `offset + coefficient·|x|^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trap1d {
    #[serde(default = "one")]
    pub coefficient: f64,
    #[serde(default = "two")]
    pub exponent: f64,
    #[serde(default)]
    pub offset: f64,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

impl Trap1d {
    pub fn harmonic() -> Self {
        Trap1d {
            coefficient: 1.0,
            exponent: 2.0,
            offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coefficient > 0.0) || !(self.exponent > 0.0) || !self.offset.is_finite() {
            return Err(SpectraError::InvalidArgument(format!("invalid 1d trap {self:?}")));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.offset + self.coefficient * x.abs().powf(self.exponent)
    }

    /// Positive turning point of level `lambda`.
    pub fn turning_point(&self, lambda: f64) -> f64 {
        ((lambda - self.offset).max(0.0) / self.coefficient).powf(1.0 / self.exponent)
    }

    /// `(1/π)∫√(Λ − V)₊ dx` and `(1/π)∫[(Λ − V)^{3/2}/3 + V(Λ − V)^{1/2}] dx`.
    pub fn phase_space_counts(&self, lambda: f64) -> Result<(f64, f64)> {
        let xt = self.turning_point(lambda);
        if xt == 0.0 {
            return Ok((0.0, 0.0));
        }
        let tol = Tolerance::new(1e-15, 1e-12, 4000)?;
        let d = |x: f64| (lambda - self.eval(x)).max(0.0);
        let n = 2.0 * numerics::integrate(|x| d(x).sqrt(), 0.0, xt, tol)? / PI;
        let e = 2.0 * numerics::integrate(|x| d(x).powf(1.5) / 3.0 + self.eval(x) * d(x).sqrt(), 0.0, xt, tol)? / PI;
        Ok((n, e))
    }
}

/// Number of eigenvalues of the symmetric tridiagonal matrix `(d, e)`
/// strictly below `x` (Sturm sequence).
fn sturm_count(d: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    let e2 = off * off;
    for &di in &d[1..] {
        let prev = if q == 0.0 { f64::EPSILON * (di.abs() + off.abs()) } else { q };
        q = di - x - e2 / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// k-th smallest eigenvalue (0-based) by bisection on the Sturm count.
fn bisect_eigenvalue(d: &[f64], off: f64, k: usize, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if !(m > a && m < b) || b - a <= 4.0 * f64::EPSILON * m.abs().max(1.0) {
            break;
        }
        if sturm_count(d, off, m) > k {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

/// Eigenvector of the tridiagonal matrix at eigenvalue `lambda` by inverse
/// iteration, normalised to `Σψ²dx = 1` with a positive first lobe.
fn inverse_iteration(d: &[f64], off: f64, lambda: f64, dx: f64) -> Vec<f64> {
    let n = d.len();
    let shift = lambda + 1e-10 * lambda.abs().max(1.0) * f64::EPSILON.sqrt();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i * 7919) % 13) as f64).collect();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    for _ in 0..4 {
        // Thomas algorithm on (T − shift)·y = x.
        let mut denom = d[0] - shift;
        if denom == 0.0 {
            denom = f64::EPSILON;
        }
        c[0] = off / denom;
        y[0] = x[0] / denom;
        for i in 1..n {
            let mut den = d[i] - shift - off * c[i - 1];
            if den == 0.0 {
                den = f64::EPSILON;
            }
            c[i] = off / den;
            y[i] = (x[i] - off * y[i - 1]) / den;
        }
        for i in (0..n - 1).rev() {
            y[i] -= c[i] * y[i + 1];
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for i in 0..n {
            x[i] = y[i] / norm;
        }
    }
    let scale = 1.0 / (x.iter().map(|v| v * v).sum::<f64>() * dx).sqrt();
    let big = x.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
    let first = x.iter().find(|v| v.abs() > 1e-3 * big).copied().unwrap_or(1.0);
    let sign = if first < 0.0 { -1.0 } else { 1.0 };
    x.iter().map(|v| v * scale * sign).collect()
}

struct FdSolve {
    grid: Vec<f64>,
    dx: f64,
    diag: Vec<f64>,
    off: f64,
    eigenvalues: Vec<f64>,
}

fn fd_eigenvalues(v: &Trap1d, hbar: f64, half_width: f64, points: usize, lambda_max: f64) -> FdSolve {
    let dx = 2.0 * half_width / (points + 1) as f64;
    let grid: Vec<f64> = (1..=points).map(|i| -half_width + dx * i as f64).collect();
    let kin = hbar * hbar / (dx * dx);
    let diag: Vec<f64> = grid.iter().map(|&x| 2.0 * kin + v.eval(x)).collect();
    let off = -kin;
    let count = sturm_count(&diag, off, lambda_max);
    let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * kin;
    let hi = lambda_max;
    let eigenvalues: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|k| bisect_eigenvalue(&diag, off, k, lo, hi))
        .collect();
    FdSolve {
        grid,
        dx,
        diag,
        off,
        eigenvalues,
    }
}

/// Eigenvalues below `lambda_max` of the three-point discretisation of
/// `−ℏ²d²/dx² + v` on `points` interior nodes of `(−L, L)` with Dirichlet
/// walls. Completeness below `lambda_max` follows from the Sturm count; a
/// second solve with `2·points + 1` nodes (half the spacing) gives the
/// refinement shift of each level.
pub fn fd_catalog_1d(v: &Trap1d, hbar: f64, half_width: f64, points: usize, lambda_max: f64) -> Result<SpectralCatalog> {
    v.validate()?;
    if points < 200 {
        return Err(SpectraError::InvalidArgument(format!("need at least 200 points, got {points}")));
    }
    if !(hbar > 0.0) || !(half_width > 0.0) {
        return Err(SpectraError::InvalidArgument("hbar and half_width must be positive".into()));
    }
    let xt = v.turning_point(lambda_max);
    if xt * 1.2 > half_width {
        return Err(SpectraError::DomainTooSmall(format!(
            "turning point {xt} needs half-width >= {}",
            1.2 * xt
        )));
    }
    let coarse = fd_eigenvalues(v, hbar, half_width, points, lambda_max);
    let fine = fd_eigenvalues(v, hbar, half_width, 2 * points + 1, lambda_max);
    let vectors: Vec<Vec<f64>> = coarse
        .eigenvalues
        .par_iter()
        .map(|&l| inverse_iteration(&coarse.diag, coarse.off, l, coarse.dx))
        .collect();
    let edge = 0.95 * half_width;
    for (k, vec) in vectors.iter().enumerate() {
        let mass: f64 = coarse
            .grid
            .iter()
            .zip(vec)
            .filter(|(x, _)| x.abs() >= edge)
            .map(|(_, p)| p * p * coarse.dx)
            .sum();
        if mass > 1e-8 {
            return Err(SpectraError::DomainTooSmall(format!(
                "eigenfunction {k} carries mass {mass:e} in the outer 5% of the domain"
            )));
        }
    }
    let refinement_shift = coarse
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, l)| fine.eigenvalues.get(k).map_or(f64::NAN, |f| (f - l).abs()))
        .collect();
    let potential = coarse.grid.iter().map(|&x| v.eval(x)).collect();
    Ok(SpectralCatalog {
        hbar,
        levels: coarse
            .eigenvalues
            .iter()
            .map(|&e| Level { energy: e, degeneracy: 1 })
            .collect(),
        provenance: Provenance::FiniteDifference1d,
        lambda_max,
        refinement_shift,
        states: Some(FdStates {
            grid: coarse.grid,
            dx: coarse.dx,
            potential,
            vectors,
        }),
    })
}

/// Half-width and node count adequate for levels up to `lambda_max`:
/// room for the evanescent tail beyond the turning point and roughly
/// `nodes_per_wavelength` nodes per local de Broglie wavelength.
pub fn fd_domain(v: &Trap1d, hbar: f64, lambda_max: f64, nodes_per_wavelength: f64) -> (f64, usize) {
    let xt = v.turning_point(lambda_max).max(hbar.sqrt());
    let slope = (v.coefficient * v.exponent * xt.powf(v.exponent - 1.0)).max(1e-12);
    let tail = (30.0 * hbar / slope.sqrt()).powf(2.0 / 3.0);
    let half_width = ((xt + 1.5 * tail) / 0.95).max(1.25 * xt);
    let p = (lambda_max - v.offset).max(0.0).sqrt().max(hbar.sqrt());
    let dx = 2.0 * PI * hbar / p / nodes_per_wavelength;
    let points = ((2.0 * half_width / dx).ceil() as usize).max(200);
    (half_width, points)
}

/// Largest `points × expected levels` a 1D Weyl row may take on; the
/// bisection and inverse iteration both scale with this product.
pub const FD_WEYL_MAX_WORK: f64 = 1e7;

/// Trap family for a Weyl scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeylTrap {
    /// `|x|² + offset` in three dimensions, analytic catalog, `ℏ = N^{-1/3}`.
    Harmonic3d { offset: f64 },
    /// One-dimensional finite differences with `ℏ = 1/N`.
    Fd1d { trap: Trap1d },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    pub n: u64,
    pub hbar: f64,
    pub n_q: u64,
    pub n_cl_scaled: f64,
    pub n_err: f64,
    pub e_q: f64,
    pub e_cl_scaled: f64,
    pub e_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylScan {
    pub lambda: f64,
    pub rows: Vec<WeylRow>,
    /// Least-squares slope of log n_err against log N.
    pub n_exponent: f64,
    pub e_exponent: f64,
    /// n_err/N and e_err/N strictly decrease along the sweep.
    pub per_particle_decreasing: bool,
}

/// Quantum counts against `N ×` phase-space counts along a sweep in N.
pub fn weyl_error_scan(trap: &WeylTrap, ns: &[u64], lambda: f64) -> Result<WeylScan> {
    if ns.is_empty() || ns.windows(2).any(|w| w[1] <= w[0]) || ns[0] < 1 {
        return Err(SpectraError::InvalidArgument("N list must be increasing and >= 1".into()));
    }
    let (n_cl, e_cl) = match trap {
        WeylTrap::Harmonic3d { offset } => {
            let v = make_potential(&PotentialSpec::Harmonic).expect("built-in");
            let b = semiclassics::phase_space_counts(&v, lambda - offset)?;
            (b.n_cl, b.e_cl + offset * b.n_cl)
        }
        WeylTrap::Fd1d { trap } => trap.phase_space_counts(lambda)?,
    };
    if let WeylTrap::Fd1d { trap } = trap {
        for &n in ns {
            let nf = n as f64;
            let (_, pts) = fd_domain(trap, 1.0 / nf, lambda, 40.0);
            if pts as f64 * (nf * n_cl).max(1.0) > FD_WEYL_MAX_WORK {
                return Err(SpectraError::InvalidArgument(format!(
                    "N = {n} is too large for the 1D scan: {pts} grid points for about {:.0} levels exceeds {FD_WEYL_MAX_WORK:e}",
                    nf * n_cl
                )));
            }
        }
    }
    let rows: Vec<WeylRow> = ns
        .par_iter()
        .map(|&n| {
            let nf = n as f64;
            let (hbar, cat) = match trap {
                WeylTrap::Harmonic3d { offset } => {
                    let hbar = nf.powf(-1.0 / 3.0);
                    (hbar, harmonic_catalog(hbar, lambda, *offset)?)
                }
                WeylTrap::Fd1d { trap } => {
                    let hbar = 1.0 / nf;
                    let (l, pts) = fd_domain(trap, hbar, lambda, 40.0);
                    (hbar, fd_catalog_1d(trap, hbar, l, pts, lambda)?)
                }
            };
            let (n_q, e_q) = spectral_counts(&cat, lambda)?;
            Ok(WeylRow {
                n,
                hbar,
                n_q,
                n_cl_scaled: nf * n_cl,
                n_err: (n_q as f64 - nf * n_cl).abs(),
                e_q,
                e_cl_scaled: nf * e_cl,
                e_err: (e_q - nf * e_cl).abs(),
            })
        })
        .collect::<Result<_>>()?;
    let fit = |f: &dyn Fn(&WeylRow) -> f64| {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| f(r) > 0.0)
            .map(|r| ((r.n as f64).ln(), f(r).ln()))
            .collect();
        if pts.len() < 2 {
            return f64::NEG_INFINITY;
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        numerics::least_squares_line(&xs, &ys).0
    };
    let n_exponent = fit(&|r| r.n_err);
    let e_exponent = fit(&|r| r.e_err);
    let per_particle_decreasing = rows.windows(2).all(|w| {
        w[1].n_err / (w[1].n as f64) < w[0].n_err / (w[0].n as f64)
            && w[1].e_err / (w[1].n as f64) < w[0].e_err / (w[0].n as f64)
    });
    Ok(WeylScan {
        lambda,
        rows,
        n_exponent,
        e_exponent,
        per_particle_decreasing,
    })
}

/// Largest oscillator shell supported by the Hermite recurrence.
pub const MAX_SHELL: usize = 200;

/// Normalised Hermite functions `ψ_0 … ψ_kmax` at `xi`, as mantissas with a
/// common log-scale: `ψ_k(xi) = m_k · exp(log_scale)`.
fn hermite_functions(xi: f64, kmax: usize) -> (Vec<f64>, f64) {
    let mut out = Vec::with_capacity(kmax + 1);
    let mut log_scale = -0.5 * xi * xi - 0.25 * PI.ln();
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    out.push(cur);
    for k in 0..kmax {
        let next = (2.0 / (k + 1) as f64).sqrt() * xi * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
        out.push(cur);
        let m = cur.abs().max(prev.abs());
        if m > 1e100 {
            prev /= m;
            cur /= m;
            for v in out.iter_mut() {
                *v /= m;
            }
            log_scale += m.ln();
        }
    }
    (out, log_scale)
}

/// `φ_k(x)² = ℏ^{-1/2} ψ_k(x/√ℏ)²` for `k ≤ kmax`.
fn oscillator_squares(hbar: f64, x: f64, kmax: usize) -> Vec<f64> {
    let (m, log_scale) = hermite_functions(x / hbar.sqrt(), kmax);
    let s = (2.0 * log_scale).exp() / hbar.sqrt();
    m.iter().map(|v| v * v * s).collect()
}

/// Density of the projector onto the `M` lowest eigenfunctions of
/// `−ℏ²Δ + |x|²`, as a radial function.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeGroundState {
    pub hbar: f64,
    pub m: u64,
    /// Occupation weight of each shell (1 for full shells, a fraction for
    /// the last one).
    pub shell_weights: Vec<f64>,
    /// `c_m = Σ_{n₂+n₃=m} φ_{n₂}(0)²φ_{n₃}(0)²`.
    transverse: Vec<f64>,
}

impl FreeGroundState {
    pub fn new(hbar: f64, m: u64) -> Result<Self> {
        if !(hbar > 0.0) || m < 1 {
            return Err(SpectraError::InvalidArgument("need hbar > 0 and M >= 1".into()));
        }
        let mut weights = Vec::new();
        let mut left = m;
        let mut n = 0usize;
        while left > 0 {
            if n > MAX_SHELL {
                return Err(SpectraError::Depth { shell: n, max: MAX_SHELL });
            }
            let deg = ((n + 1) * (n + 2) / 2) as u64;
            if left >= deg {
                weights.push(1.0);
                left -= deg;
            } else {
                weights.push(left as f64 / deg as f64);
                left = 0;
            }
            n += 1;
        }
        let kmax = weights.len() - 1;
        let at0 = oscillator_squares(hbar, 0.0, kmax);
        let transverse = (0..=kmax)
            .map(|mm| (0..=mm).map(|a| at0[a] * at0[mm - a]).sum())
            .collect();
        Ok(FreeGroundState {
            hbar,
            m,
            shell_weights: weights,
            transverse,
        })
    }

    pub fn max_shell(&self) -> usize {
        self.shell_weights.len() - 1
    }

    /// ρ(r) = Σ_n w_n Σ_{n₁ ≤ n} φ_{n₁}(r)² c_{n−n₁}.
    pub fn density(&self, r: f64) -> f64 {
        let kmax = self.max_shell();
        let sq = oscillator_squares(self.hbar, r, kmax);
        let mut total = 0.0;
        for (n, w) in self.shell_weights.iter().enumerate() {
            let mut shell = 0.0;
            for n1 in 0..=n {
                shell += sq[n1] * self.transverse[n - n1];
            }
            total += w * shell;
        }
        total
    }

    /// Radius beyond which the density is negligible (≲ e^{-40} relative).
    pub fn outer_radius(&self) -> f64 {
        let e = self.hbar * (2 * self.max_shell() + 3) as f64;
        e.sqrt() + 10.0 * self.hbar.sqrt()
    }

    pub fn mass(&self) -> Result<f64> {
        let tol = Tolerance::new(1e-14, 1e-11, 4000)?;
        let r = self.outer_radius();
        let breaks = numerics::linspace(0.0, r, 4 * (self.max_shell() + 2));
        Ok(numerics::integrate_radial_with_breaks(|x| self.density(x), r, &breaks, tol)?)
    }
}

pub fn free_ground_state_density(hbar: f64, m: u64, nodes: &[f64]) -> Result<RadialProfile> {
    let g = FreeGroundState::new(hbar, m)?;
    let values: Vec<f64> = nodes.par_iter().map(|&r| g.density(r)).collect();
    Ok(RadialProfile::new(nodes.to_vec(), values, Tail::Zero)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeDensityRow {
    pub n: u64,
    pub m: u64,
    pub hbar: f64,
    pub mass: f64,
    pub l1_distance: f64,
}

/// L¹ distance between `2ρ_{P_M}/N` (M = ⌈N/2⌉, ℏ = N^{-1/3}) and the
/// Thomas–Fermi density `(λ − |x|²)₊^{3/2}/(3π²)` of the harmonic trap.
pub fn free_density_sweep(ns: &[u64]) -> Result<Vec<FreeDensityRow>> {
    let lambda = 24f64.powf(1.0 / 3.0);
    let tf = |r: f64| (lambda - r * r).max(0.0).powf(1.5) / (3.0 * PI * PI);
    ns.par_iter()
        .map(|&n| {
            let nf = n as f64;
            let hbar = nf.powf(-1.0 / 3.0);
            let m = n.div_ceil(2);
            let g = FreeGroundState::new(hbar, m)?;
            let r_max = g.outer_radius().max(lambda.sqrt() * 1.05);
            let nodes = numerics::linspace(0.0, r_max, 6001);
            let scaled: Vec<f64> = nodes.iter().map(|&r| 2.0 * g.density(r) / nf).collect();
            let p = RadialProfile::new(nodes.clone(), scaled, Tail::Zero)?;
            let mut tf_nodes = nodes.clone();
            tf_nodes.push(lambda.sqrt());
            tf_nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
            tf_nodes.dedup();
            let q = RadialProfile::from_fn(tf_nodes, tf, Tail::Zero)?;
            Ok(FreeDensityRow {
                n,
                m,
                hbar,
                mass: g.mass()?,
                l1_distance: numerics::lp_distance(&p, &q, 1.0)?,
            })
        })
        .collect()
}

/// `ℏ_x, ℏ_p` with `ℏ_xℏ_p = ℏ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbarSplit {
    pub hbar_x: f64,
    pub hbar_p: f64,
}

impl HbarSplit {
    /// `√ℏ_x = ℏ_p = ℏ^{2/3}`.
    pub fn default_for(hbar: f64) -> Self {
        HbarSplit {
            hbar_x: hbar.powf(4.0 / 3.0),
            hbar_p: hbar.powf(2.0 / 3.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HusimiReport {
    pub hbar: f64,
    pub hbar_x: f64,
    pub hbar_p: f64,
    pub fill: usize,
    /// |∫m dxdp/(2πℏ) − fill| / fill.
    pub resolution_residual: f64,
    /// Phase-space kinetic energy minus tr(−ℏ²Δγ).
    pub kinetic_excess: f64,
    /// ℏ_p·fill·‖f'‖².
    pub kinetic_expected_excess: f64,
    /// |kinetic_excess − expected| / expected.
    pub kinetic_identity_residual: f64,
    /// |∫V m dxdp/(2πℏ) − tr(Vγ)| / fill.
    pub potential_identity_residual: f64,
    pub p_f: f64,
    /// |∫min(p², p_F²) m dxdp/(2πℏ) − tr(min(−ℏ²Δ, p_F²)γ)| / fill.
    pub lowfreq_identity_residual: f64,
    pub m_min: f64,
    pub m_max: f64,
    pub phase_points: usize,
}

/// ‖f'‖² for the window `f(t) = π^{-1/4}e^{-t²/2}`.
pub const WINDOW_GRADIENT_NORM2: f64 = 0.5;

/// Coherent-state checks on the projector onto the `fill` lowest states of
/// a finite-difference catalog.
///
/// Coherent states are `ℏ_x^{-1/4}f((y − x)/√ℏ_x)e^{ipy/ℏ}`; overlaps are
/// Riemann sums on the catalog grid. Phase space is sampled by the
/// trapezoid rule with steps `√ℏ_x/4` in x and `√ℏ_p/4` in p.
pub fn coherent_identity_check_1d(catalog: &SpectralCatalog, fill: usize, split: HbarSplit, p_f: f64) -> Result<HusimiReport> {
    let states = catalog
        .states
        .as_ref()
        .ok_or_else(|| SpectraError::InvalidArgument("catalog carries no eigenvectors".into()))?;
    let hbar = catalog.hbar;
    if fill < 1 || fill > states.vectors.len() {
        return Err(SpectraError::InvalidArgument(format!(
            "fill {fill} outside 1..={}",
            states.vectors.len()
        )));
    }
    if !((split.hbar_x * split.hbar_p - hbar * hbar).abs() <= 1e-10 * hbar * hbar) {
        return Err(SpectraError::InvalidArgument("hbar_x·hbar_p must equal hbar²".into()));
    }
    let sx = split.hbar_x.sqrt();
    let sp = split.hbar_p.sqrt();
    let dx = states.dx;
    if sx / dx < 8.0 {
        return Err(SpectraError::Resolution(format!(
            "{:.2} grid nodes per coherent width, need at least 8",
            sx / dx
        )));
    }
    let grid = &states.grid;
    let psi = &states.vectors[..fill];
    let lam_max = catalog.levels[fill - 1].energy;
    let p_max = 1.5 * lam_max.max(0.0).sqrt() + 10.0 * sp;
    if p_max >= PI * hbar / dx {
        return Err(SpectraError::Resolution(format!(
            "momentum window {p_max} exceeds the grid band limit {}",
            PI * hbar / dx
        )));
    }
    let x_lo = grid[0];
    let x_hi = grid[grid.len() - 1];
    let hx = sx / 4.0;
    let hp = sp / 4.0;
    let nx = ((x_hi - x_lo) / hx).ceil() as usize + 1;
    let np = (2.0 * p_max / hp).ceil() as usize + 1;
    let xs = numerics::linspace(x_lo, x_hi, nx);
    let ps = numerics::linspace(-p_max, p_max, np);
    let wx = (x_hi - x_lo) / (nx - 1) as f64;
    let wp = 2.0 * p_max / (np - 1) as f64;
    let trap_w = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let norm_f = PI.powf(-0.25) * split.hbar_x.powf(-0.25);
    let reach = 9.0 * sx;

    struct Acc {
        mass: f64,
        kin: f64,
        pot: f64,
        low: f64,
        mmin: f64,
        mmax: f64,
    }
    let v_at = |x: f64| {
        // Linear interpolation of the sampled potential.
        let i = ((x - grid[0]) / dx).floor().clamp(0.0, (grid.len() - 2) as f64) as usize;
        let t = (x - grid[i]) / dx;
        states.potential[i] * (1.0 - t) + states.potential[i + 1] * t
    };
    let acc = xs
        .par_iter()
        .enumerate()
        .map(|(ix, &x)| {
            let lo = grid.partition_point(|&y| y < x - reach);
            let hi = grid.partition_point(|&y| y <= x + reach);
            let window: Vec<(f64, f64)> = (lo..hi)
                .map(|i| {
                    let t = (grid[i] - x) / sx;
                    (grid[i], norm_f * (-0.5 * t * t).exp())
                })
                .collect();
            let mut a = Acc {
                mass: 0.0,
                kin: 0.0,
                pot: 0.0,
                low: 0.0,
                mmin: f64::INFINITY,
                mmax: f64::NEG_INFINITY,
            };
            let vx = v_at(x);
            for (ip, &p) in ps.iter().enumerate() {
                let mut m = 0.0;
                for state in psi {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (k, &(y, fy)) in window.iter().enumerate() {
                        let phase = p * y / hbar;
                        let w = fy * state[lo + k];
                        re += w * phase.cos();
                        im -= w * phase.sin();
                    }
                    m += (re * re + im * im) * dx * dx;
                }
                let w = trap_w(ix, nx) * trap_w(ip, np) * wx * wp / (2.0 * PI * hbar);
                a.mass += w * m;
                a.kin += w * m * p * p;
                a.pot += w * m * vx;
                a.low += w * m * (p * p).min(p_f * p_f);
                a.mmin = a.mmin.min(m);
                a.mmax = a.mmax.max(m);
            }
            a
        })
        .collect::<Vec<Acc>>()
        .into_iter()
        .fold(
            Acc {
                mass: 0.0,
                kin: 0.0,
                pot: 0.0,
                low: 0.0,
                mmin: f64::INFINITY,
                mmax: f64::NEG_INFINITY,
            },
            |a, b| Acc {
                mass: a.mass + b.mass,
                kin: a.kin + b.kin,
                pot: a.pot + b.pot,
                low: a.low + b.low,
                mmin: a.mmin.min(b.mmin),
                mmax: a.mmax.max(b.mmax),
            },
        );

    // tr(−ℏ²Δγ) with the band-limited (sinc) second derivative on the grid.
    let kin_scale = hbar * hbar / (dx * dx);
    let n = grid.len();
    let kernel: Vec<f64> = (0..n)
        .map(|m| {
            if m == 0 {
                PI * PI / 3.0
            } else {
                let s = if m % 2 == 0 { 1.0 } else { -1.0 };
                2.0 * s / (m as f64 * m as f64)
            }
        })
        .collect();
    let tr_kin: f64 = psi
        .par_iter()
        .map(|state| {
            let mut t = 0.0;
            for j in 0..n {
                if state[j] == 0.0 {
                    continue;
                }
                let mut row = 0.0;
                for l in 0..n {
                    row += kernel[j.abs_diff(l)] * state[l];
                }
                t += state[j] * row;
            }
            t * kin_scale * dx
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    let tr_pot: f64 = psi
        .iter()
        .map(|s| s.iter().zip(&states.potential).map(|(p, v)| p * p * v).sum::<f64>() * dx)
        .sum();
    // tr(min(−ℏ²Δ, p_F²)γ) through the grid Fourier transform.
    let tr_low: f64 = {
        let x_span = x_hi - x_lo;
        let hq = hbar / (8.0 * x_span);
        let nq = (2.0 * p_max / hq).ceil() as usize + 1;
        let qs = numerics::linspace(-p_max, p_max, nq);
        let wq = 2.0 * p_max / (nq - 1) as f64;
        qs.par_iter()
            .enumerate()
            .map(|(iq, &q)| {
                let g = (q * q).min(p_f * p_f);
                let mut s = 0.0;
                for state in psi {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (y, v) in grid.iter().zip(state) {
                        let ph = q * y / hbar;
                        re += v * ph.cos();
                        im -= v * ph.sin();
                    }
                    s += (re * re + im * im) * dx * dx;
                }
                trap_w(iq, nq) * wq * g * s / (2.0 * PI * hbar)
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum()
    };

    let fillf = fill as f64;
    let expected = split.hbar_p * fillf * WINDOW_GRADIENT_NORM2;
    let excess = acc.kin - tr_kin;
    Ok(HusimiReport {
        hbar,
        hbar_x: split.hbar_x,
        hbar_p: split.hbar_p,
        fill,
        resolution_residual: (acc.mass - fillf).abs() / fillf,
        kinetic_excess: excess,
        kinetic_expected_excess: expected,
        kinetic_identity_residual: (excess - expected).abs() / expected,
        potential_identity_residual: (acc.pot - tr_pot).abs() / fillf,
        p_f,
        lowfreq_identity_residual: (acc.low - tr_low).abs() / fillf,
        m_min: acc.mmin,
        m_max: acc.mmax,
        phase_points: nx * np,
    })
}
