//! Thomas–Fermi functionals: the single-density minimizer, the two-spin
//! functional with contact coupling, and the momentum-cutoff variant.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, NumericsError, RadialProfile, Tail, Tolerance};
use crate::potentials::{self, Potential};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TfError {
    #[error("normalization failed: {0}")]
    Normalization(String),
    #[error("density takes negative value {value} at r = {r}")]
    NegativeDensity { r: f64, value: f64 },
    #[error("fixed point did not converge in {iterations} iterations; L1 residual history {history:?}")]
    Convergence { iterations: usize, history: Vec<f64> },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, TfError>;

/// `c_TF = (3/5)(6π²)^{2/3}`.
pub fn c_tf() -> f64 {
    0.6 * (6.0 * PI * PI).powf(2.0 / 3.0)
}

/// `κ = (5/3)·2^{-2/3}·c_TF = (3π²)^{2/3}`.
pub fn kappa() -> f64 {
    (3.0 * PI * PI).powf(2.0 / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TFConstants {
    pub c_tf: f64,
    pub kappa: f64,
}

pub fn tf_constants() -> TFConstants {
    TFConstants {
        c_tf: c_tf(),
        kappa: kappa(),
    }
}

/// Pointwise minimizer `((λ − V)₊/κ)^{3/2}`, exactly zero where `V ≥ λ`.
pub fn tf_density(lambda: f64, v: f64) -> f64 {
    let d = lambda - v;
    if d <= 0.0 {
        0.0
    } else {
        (d / kappa()).powf(1.5)
    }
}

/// Samples of a density on a tensor grid (non-radial traps).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub axes: [Vec<f64>; 3],
    /// Row-major, z fastest.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Density {
    Radial(RadialProfile),
    Grid(GridField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TFSolution {
    pub potential: Potential,
    pub lambda_tf: f64,
    pub support_radius: f64,
    pub rho: Density,
    pub mass: f64,
    pub e_tf: f64,
    /// ∫ρ^{5/3}
    pub kinetic_integral: f64,
    /// ∫Vρ
    pub potential_integral: f64,
    /// ∫ρ²
    pub interaction_integral: f64,
    /// max |κρ^{2/3} + V − λ| over sampled points with ρ > 0.
    pub lagrange_residual: f64,
    /// Every sampled point with ρ = 0 has V ≥ λ.
    pub exterior_consistent: bool,
}

impl TFSolution {
    pub fn rho_at(&self, x: [f64; 3]) -> f64 {
        tf_density(self.lambda_tf, self.potential.eval(x))
    }

    pub fn rho_radial(&self, r: f64) -> f64 {
        tf_density(self.lambda_tf, self.potential.eval_radial(r))
    }

    pub fn profile(&self) -> Option<&RadialProfile> {
        match &self.rho {
            Density::Radial(p) => Some(p),
            Density::Grid(_) => None,
        }
    }

    /// Rows `(r, ρ, V, κρ^{2/3} + V − λ)` for radial solutions; the residual
    /// is reported as 0 outside the support.
    pub fn profile_rows(&self) -> Vec<[f64; 4]> {
        match &self.rho {
            Density::Radial(p) => p
                .nodes()
                .iter()
                .zip(p.values())
                .map(|(&r, &rho)| {
                    let v = self.potential.eval_radial(r);
                    let res = if rho > 0.0 {
                        kappa() * rho.powf(2.0 / 3.0) + v - self.lambda_tf
                    } else {
                        0.0
                    };
                    [r, rho, v, res]
                })
                .collect(),
            Density::Grid(_) => Vec::new(),
        }
    }
}

pub const PROFILE_NODES: usize = 2001;
const GRID_NODES: usize = 41;

fn integral_tol(v: &Potential, tol: Tolerance) -> Tolerance {
    if v.is_radial() {
        Tolerance {
            abs: 1e-15,
            rel: (tol.rel * 1e-2).clamp(1e-13, 1e-9),
            max_refinements: tol.max_refinements.max(2000),
        }
    } else {
        Tolerance {
            abs: 1e-12,
            rel: (tol.rel).clamp(1e-9, 1e-7),
            max_refinements: tol.max_refinements.max(2000),
        }
    }
}

/// Mass of the closed-form density at chemical potential `lambda`.
pub fn tf_mass(v: &Potential, lambda: f64, tol: Tolerance) -> Result<f64> {
    Ok(potentials::sublevel_integral(
        v,
        lambda,
        |vx| tf_density(lambda, vx),
        integral_tol(v, tol),
    )?)
}

/// Solves for λ with ∫((λ − V)₊/κ)^{3/2} = 1 and evaluates the functional.
pub fn tf_solve(v: &Potential, tol: Tolerance) -> Result<TFSolution> {
    tol.validate()?;
    let itol = integral_tol(v, tol);
    let vmin = v.min_value();
    let defect = |lambda: f64| tf_mass(v, lambda, tol).map(|m| m - 1.0).unwrap_or(f64::NAN);
    let hi = numerics::expand_bracket(&defect, vmin, vmin + 1.0, 60).ok_or_else(|| {
        TfError::Normalization("no chemical potential reaches unit mass".into())
    })?;
    let root_tol = Tolerance {
        abs: tol.abs.min(1e-13),
        rel: tol.rel.min(1e-12),
        max_refinements: tol.max_refinements,
    };
    let root = numerics::find_root_monotone(defect, vmin, hi, root_tol)
        .map_err(|e| TfError::Normalization(e.to_string()))?;
    let lambda = root.x;
    let integ = |f: &dyn Fn(f64) -> f64| potentials::sublevel_integral(v, lambda, f, itol);
    let mass = integ(&|vx| tf_density(lambda, vx))?;
    let kinetic = integ(&|vx| tf_density(lambda, vx).powf(5.0 / 3.0))?;
    let pot = integ(&|vx| vx * tf_density(lambda, vx))?;
    let inter = integ(&|vx| tf_density(lambda, vx).powi(2))?;
    let e_tf = 2f64.powf(-2.0 / 3.0) * c_tf() * kinetic + pot;

    let (rho, support_radius, residual, exterior_ok) = if v.is_radial() {
        let rs = v.sublevel_radius(lambda);
        let nodes = numerics::linspace(0.0, 1.5 * rs, PROFILE_NODES);
        let profile = RadialProfile::from_fn(nodes, |r| tf_density(lambda, v.eval_radial(r)), Tail::Zero)?;
        let (res, ext) = lagrange_check(
            profile
                .nodes()
                .iter()
                .zip(profile.values())
                .map(|(&r, &rho)| (v.eval_radial(r), rho)),
            lambda,
        );
        (Density::Radial(profile), rs, res, ext)
    } else {
        let h = v.sublevel_half_widths(lambda);
        let axes = [
            numerics::linspace(-1.2 * h[0], 1.2 * h[0], GRID_NODES),
            numerics::linspace(-1.2 * h[1], 1.2 * h[1], GRID_NODES),
            numerics::linspace(-1.2 * h[2], 1.2 * h[2], GRID_NODES),
        ];
        let mut values = Vec::with_capacity(GRID_NODES.pow(3));
        let mut samples = Vec::with_capacity(GRID_NODES.pow(3));
        for &x in &axes[0] {
            for &y in &axes[1] {
                for &z in &axes[2] {
                    let vx = v.eval([x, y, z]);
                    let rho = tf_density(lambda, vx);
                    values.push(rho);
                    samples.push((vx, rho));
                }
            }
        }
        let (res, ext) = lagrange_check(samples.into_iter(), lambda);
        let radius = h.iter().cloned().fold(0.0, f64::max);
        (Density::Grid(GridField { axes, values }), radius, res, ext)
    };

    Ok(TFSolution {
        potential: v.clone(),
        lambda_tf: lambda,
        support_radius,
        rho,
        mass,
        e_tf,
        kinetic_integral: kinetic,
        potential_integral: pot,
        interaction_integral: inter,
        lagrange_residual: residual,
        exterior_consistent: exterior_ok,
    })
}

fn lagrange_check<I: Iterator<Item = (f64, f64)>>(samples: I, lambda: f64) -> (f64, bool) {
    let k = kappa();
    let mut res = 0.0f64;
    let mut ok = true;
    for (vx, rho) in samples {
        if rho > 0.0 {
            res = res.max((k * rho.powf(2.0 / 3.0) + vx - lambda).abs());
        } else if vx < lambda {
            ok = false;
        }
    }
    (res, ok)
}

/// `2^{-2/3}c_TF∫ρ^{5/3} + ∫Vρ` for a radial trial density; mass is not
/// constrained.
pub fn tf_functional(v: &Potential, rho: &RadialProfile) -> Result<f64> {
    if !v.is_radial() {
        return Err(TfError::Unsupported(
            "functional evaluation on radial profiles needs a radial trap".into(),
        ));
    }
    if let Some((r, val)) = rho
        .nodes()
        .iter()
        .zip(rho.values())
        .find(|(_, &x)| x < 0.0)
    {
        return Err(TfError::NegativeDensity { r: *r, value: *val });
    }
    match rho.tail() {
        Tail::Zero => {}
        other => {
            return Err(TfError::InvalidArgument(format!(
                "trial density must vanish beyond its nodes, tail is {other:?}"
            )))
        }
    }
    let c = 2f64.powf(-2.0 / 3.0) * c_tf();
    let tol = Tolerance::new(1e-15, 1e-11, 200)?;
    Ok(rho.integrate_map(|r, d| c * d.max(0.0).powf(5.0 / 3.0) + v.eval_radial(r) * d, tol)?)
}

/// One entry of the minimizing-sequence diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceEntry {
    pub amplitude: f64,
    pub energy: f64,
    pub distance_5_3: f64,
    pub mass: f64,
}

/// Perturbs the minimizer by mass-preserving, positivity-preserving bumps
/// `ρ(1 + ε(φ − ⟨φ⟩_ρ))` with `φ(r) = cos(πr/R)` and reports the functional
/// value and L^{5/3} distance for each amplitude `ε ∈ (0, 1/2]`.
pub fn minimizing_sequence(sol: &TFSolution, amplitudes: &[f64]) -> Result<Vec<SequenceEntry>> {
    let base = sol
        .profile()
        .ok_or_else(|| TfError::Unsupported("radial solution required".into()))?;
    let rs = sol.support_radius;
    let phi = |r: f64| (PI * r / rs).cos();
    let tol = Tolerance::new(1e-15, 1e-12, 2000)?;
    let v = &sol.potential;
    let weighted = numerics::integrate_radial(|r| sol.rho_radial(r) * phi(r), rs, tol)?;
    let mass = numerics::integrate_radial(|r| sol.rho_radial(r), rs, tol)?;
    let avg = weighted / mass;
    let mut out = Vec::with_capacity(amplitudes.len());
    for &eps in amplitudes {
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(TfError::InvalidArgument(format!(
                "amplitude {eps} outside (0, 1/2]"
            )));
        }
        let values: Vec<f64> = base
            .nodes()
            .iter()
            .zip(base.values())
            .map(|(&r, &rho)| rho * (1.0 + eps * (phi(r) - avg)))
            .collect();
        let trial = RadialProfile::new(base.nodes().to_vec(), values, Tail::Zero)?;
        let energy = tf_functional(v, &trial)?;
        let distance = numerics::lp_distance(&trial, base, 5.0 / 3.0)?;
        let m = trial.integrate_map(|_, d| d, tol)?;
        out.push(SequenceEntry {
            amplitude: eps,
            energy,
            distance_5_3: distance,
            mass: m,
        });
    }
    Ok(out)
}

/// Minimizer of the two-spin functional with contact coupling `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSpinState {
    pub g: f64,
    pub rho_up: RadialProfile,
    pub rho_down: RadialProfile,
    /// Shared multiplier of the mass constraint.
    pub mu: f64,
    pub energy: f64,
    pub mass: f64,
    pub iterations: usize,
    /// L¹ change of the density pair at each iteration.
    pub residual_history: Vec<f64>,
    /// sup |ρ↑ − ρ↓| over the nodes.
    pub spin_gap: f64,
}

/// Per-spin inversion `(μ − V − gρ_other)₊^{3/2}/(6π²)`.
fn spin_density(mu: f64, v: f64, g: f64, other: f64) -> f64 {
    let d = mu - v - g * other;
    if d <= 0.0 {
        0.0
    } else {
        d.powf(1.5) / (6.0 * PI * PI)
    }
}

/// ∫ F(r) 4πr² dr over the nodes of `other`, where `F` is built from the
/// partner profile; each node interval is split where `μ − V − gρ_other`
/// changes sign.
fn spin_integral<F: Fn(f64, f64) -> f64>(
    v: &Potential,
    other: &RadialProfile,
    mu: f64,
    g: f64,
    f: F,
    tol: Tolerance,
) -> Result<f64> {
    let arg = |r: f64| mu - v.eval_radial(r) - g * other.eval(r);
    let nodes = other.nodes();
    let mut total = 0.0;
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ga, gb) = (arg(a), arg(b));
        if ga <= 0.0 && gb <= 0.0 {
            continue;
        }
        let integrand = |r: f64| 4.0 * PI * r * r * f(r, spin_density(mu, v.eval_radial(r), g, other.eval(r)));
        if ga * gb < 0.0 {
            let z = numerics::locate_sign_changes(arg, a, b, 1);
            let mut pts = vec![a];
            pts.extend(z);
            pts.push(b);
            total += numerics::integrate_with_breaks(integrand, &pts, tol)?;
        } else {
            total += numerics::integrate(integrand, a, b, tol)?;
        }
    }
    Ok(total)
}

pub const TWO_SPIN_DAMPING: f64 = 0.5;
pub const TWO_SPIN_MAX_ITERATIONS: usize = 500;
const TWO_SPIN_NODES: usize = 801;

/// Minimizes `c_TF∫(ρ↑^{5/3}+ρ↓^{5/3}) + ∫V(ρ↑+ρ↓) + g∫ρ↑ρ↓` under unit
/// total mass by damped simultaneous inversion: each spin is recomputed
/// from the other with a shared multiplier, then mixed 50/50 with its
/// previous iterate.
///
/// The reported energy is that of the final inverted pair evaluated in
/// closed form against the partner profiles, which has unit mass exactly.
pub fn two_spin_minimize(v: &Potential, g: f64, tol: Tolerance) -> Result<TwoSpinState> {
    tol.validate()?;
    if !(g >= 0.0) || !g.is_finite() {
        return Err(TfError::InvalidArgument(format!("coupling g = {g} must be >= 0")));
    }
    if !v.is_radial() {
        return Err(TfError::Unsupported(
            "two-spin minimization is implemented for radial traps".into(),
        ));
    }
    let tf = tf_solve(v, tol)?;
    let rho0 = tf.rho_radial(0.0);
    let r_max = 1.05 * v.sublevel_radius(tf.lambda_tf + g * rho0);
    let nodes = numerics::linspace(0.0, r_max, TWO_SPIN_NODES);
    let half = RadialProfile::from_fn(nodes.clone(), |r| 0.5 * tf.rho_radial(r), Tail::Zero)?;
    if g == 0.0 {
        return Ok(TwoSpinState {
            g,
            rho_up: half.clone(),
            rho_down: half,
            mu: tf.lambda_tf,
            energy: tf.e_tf,
            mass: tf.mass,
            iterations: 0,
            residual_history: Vec::new(),
            spin_gap: 0.0,
        });
    }

    let itol = Tolerance::new(1e-16, 1e-12, 200)?;
    let root_tol = Tolerance::new(1e-14, 1e-13, 400)?;
    let total_mass = |mu: f64, up: &RadialProfile, down: &RadialProfile| -> Result<f64> {
        Ok(spin_integral(v, down, mu, g, |_, d| d, itol)? + spin_integral(v, up, mu, g, |_, d| d, itol)?)
    };
    let solve_mu = |up: &RadialProfile, down: &RadialProfile| -> Result<f64> {
        let lo = v.min_value();
        let hi = tf.lambda_tf + g * rho0 + 1.0;
        let root = numerics::find_root_monotone(
            |mu| total_mass(mu, up, down).map(|m| m - 1.0).unwrap_or(f64::NAN),
            lo,
            hi,
            root_tol,
        )
        .map_err(|e| TfError::Normalization(e.to_string()))?;
        Ok(root.x)
    };

    let mut up = half.clone();
    let mut down = half;
    let mut history = Vec::new();
    let mut converged = false;
    for _ in 0..TWO_SPIN_MAX_ITERATIONS {
        let mu = solve_mu(&up, &down)?;
        let new_up: Vec<f64> = nodes
            .iter()
            .map(|&r| spin_density(mu, v.eval_radial(r), g, down.eval(r)))
            .collect();
        let new_down: Vec<f64> = nodes
            .iter()
            .map(|&r| spin_density(mu, v.eval_radial(r), g, up.eval(r)))
            .collect();
        let mix = |old: &RadialProfile, new: &[f64]| -> Result<RadialProfile> {
            let vals = old
                .values()
                .iter()
                .zip(new)
                .map(|(o, n)| (1.0 - TWO_SPIN_DAMPING) * o + TWO_SPIN_DAMPING * n)
                .collect();
            Ok(RadialProfile::new(nodes.clone(), vals, Tail::Zero)?)
        };
        let next_up = mix(&up, &new_up)?;
        let next_down = mix(&down, &new_down)?;
        let change = numerics::lp_distance(&next_up, &up, 1.0)? + numerics::lp_distance(&next_down, &down, 1.0)?;
        history.push(change);
        up = next_up;
        down = next_down;
        if change <= tol.rel {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(TfError::Convergence {
            iterations: history.len(),
            history,
        });
    }

    let mu = solve_mu(&up, &down)?;
    let c = c_tf();
    // Final pair: ρ↑ inverted against ρ↓ and vice versa.
    let pair_energy = |own_partner: &RadialProfile, cross: &RadialProfile| -> Result<f64> {
        spin_integral(
            v,
            own_partner,
            mu,
            g,
            |r, d| {
                let other = spin_density(mu, v.eval_radial(r), g, cross.eval(r));
                c * d.powf(5.0 / 3.0) + v.eval_radial(r) * d + 0.5 * g * d * other
            },
            itol,
        )
    };
    let energy = pair_energy(&down, &up)? + pair_energy(&up, &down)?;
    let mass = total_mass(mu, &up, &down)?;
    let spin_gap = up
        .values()
        .iter()
        .zip(down.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(TwoSpinState {
        g,
        rho_up: up,
        rho_down: down,
        mu,
        energy,
        mass,
        iterations: history.len(),
        residual_history: history,
        spin_gap,
    })
}

/// Two-spin functional evaluated on explicit radial profiles.
pub fn two_spin_functional(v: &Potential, g: f64, up: &RadialProfile, down: &RadialProfile) -> Result<f64> {
    let c = c_tf();
    let tol = Tolerance::new(1e-15, 1e-11, 200)?;
    let e_up = up.integrate_map(|r, d| c * d.max(0.0).powf(5.0 / 3.0) + v.eval_radial(r) * d + g * d * down.eval(r), tol)?;
    let e_down = down.integrate_map(|r, d| c * d.max(0.0).powf(5.0 / 3.0) + v.eval_radial(r) * d, tol)?;
    Ok(e_up + e_down)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffRegime {
    /// `λ_TF − min V ≤ p_F²`: the cap never binds.
    Inactive,
    /// The cap binds at the trap minimum; mass above it condenses there.
    Active,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffTFSolution {
    pub p_f: f64,
    pub e_tf_pf: f64,
    pub overflow_mass: f64,
    pub mu: f64,
    /// Density at which the local Fermi momentum reaches `p_F`.
    pub rho_star: f64,
    pub regime: CutoffRegime,
}

/// Energy density of the cutoff functional: `(3/5)κρ^{5/3}` up to
/// `ρ* = p_F³/(3π²)`, continued by its tangent `p_F²ρ − 2p_F⁵/(15π²)`.
pub fn cutoff_energy_density(rho: f64, p_f: f64) -> f64 {
    let rho_star = p_f.powi(3) / (3.0 * PI * PI);
    if rho <= rho_star {
        0.6 * kappa() * rho.max(0.0).powf(5.0 / 3.0)
    } else {
        p_f * p_f * rho - 2.0 * p_f.powi(5) / (15.0 * PI * PI)
    }
}

/// Minimizes `∫e_{p_F}(ρ) + ∫Vρ` over unit-mass densities.
///
/// The density is `((μ − V)₊/κ)^{3/2}`, capped at `ρ*`. When the
/// unconstrained multiplier exceeds `min V + p_F²`, the functional is
/// linear above the cap and the infimum puts the excess mass at the trap
/// minimum; by duality the value is `E[ρ_{μ*}] + (1 − m*)μ*` with
/// `μ* = min V + p_F²`.
pub fn cutoff_tf_solve(v: &Potential, p_f: f64, tol: Tolerance) -> Result<CutoffTFSolution> {
    if !(p_f > 0.0) || !p_f.is_finite() {
        return Err(TfError::InvalidArgument(format!("p_F = {p_f} must be positive")));
    }
    let tf = tf_solve(v, tol)?;
    let rho_star = p_f.powi(3) / (3.0 * PI * PI);
    let mu_star = v.min_value() + p_f * p_f;
    if tf.lambda_tf <= mu_star {
        return Ok(CutoffTFSolution {
            p_f,
            e_tf_pf: tf.e_tf,
            overflow_mass: 0.0,
            mu: tf.lambda_tf,
            rho_star,
            regime: CutoffRegime::Inactive,
        });
    }
    let itol = integral_tol(v, tol);
    let m = potentials::sublevel_integral(v, mu_star, |vx| tf_density(mu_star, vx), itol)?;
    let e = potentials::sublevel_integral(
        v,
        mu_star,
        |vx| {
            let d = tf_density(mu_star, vx);
            cutoff_energy_density(d, p_f) + vx * d
        },
        itol,
    )?;
    Ok(CutoffTFSolution {
        p_f,
        e_tf_pf: e + (1.0 - m) * mu_star,
        overflow_mass: 1.0 - m,
        mu: mu_star,
        rho_star,
        regime: CutoffRegime::Active,
    })
}
