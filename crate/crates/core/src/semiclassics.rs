//! Phase-space counting: N^cl(Λ), E^cl(Λ), filling levels, and a numerical
//! probe of the differentiability of Λ ↦ N^cl(Λ).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, NumericsError, Tolerance};
use crate::potentials::{self, Potential};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemiclassicsError {
    #[error("phase-space integral diverges: {0}")]
    Divergence(String),
    #[error("normalization failed: {0}")]
    Normalization(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, SemiclassicsError>;

/// Phase-space number and energy at level Λ, with `e_tilde = e_cl − Λ n_cl`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceBudget {
    pub lambda: f64,
    pub n_cl: f64,
    pub e_cl: f64,
    pub e_tilde: f64,
}

fn counts_tol() -> Tolerance {
    Tolerance {
        abs: 1e-15,
        rel: 1e-12,
        max_refinements: 4000,
    }
}

/// `n_cl = (2π)^{-3}|{|p|² + V ≤ Λ}|` and `e_cl = (2π)^{-3}∫(|p|² + V)` over
/// the same set, with the momentum integral done in closed form.
pub fn phase_space_counts(v: &Potential, lambda: f64) -> Result<PhaseSpaceBudget> {
    phase_space_counts_tol(v, lambda, counts_tol())
}

pub fn phase_space_counts_tol(v: &Potential, lambda: f64, tol: Tolerance) -> Result<PhaseSpaceBudget> {
    if !lambda.is_finite() {
        return Err(SemiclassicsError::Divergence(format!("level {lambda} is not finite")));
    }
    if lambda <= v.min_value() {
        return Ok(PhaseSpaceBudget {
            lambda,
            n_cl: 0.0,
            e_cl: 0.0,
            e_tilde: 0.0,
        });
    }
    if !v.sublevel_radius(lambda).is_finite() {
        return Err(SemiclassicsError::Divergence(format!(
            "sub-level set of {lambda} is unbounded"
        )));
    }
    let n_cl = potentials::sublevel_integral(
        v,
        lambda,
        |vx| (lambda - vx).max(0.0).powf(1.5) / (6.0 * PI * PI),
        tol,
    )?;
    let e_cl = potentials::sublevel_integral(
        v,
        lambda,
        |vx| {
            let d = (lambda - vx).max(0.0);
            (0.2 * d.powf(2.5) + vx / 3.0 * d.powf(1.5)) / (2.0 * PI * PI)
        },
        tol,
    )?;
    Ok(PhaseSpaceBudget {
        lambda,
        n_cl,
        e_cl,
        e_tilde: e_cl - lambda * n_cl,
    })
}

/// Budgets for every level, evaluated in parallel, in input order.
pub fn sweep(v: &Potential, lambdas: &[f64]) -> Result<Vec<PhaseSpaceBudget>> {
    lambdas.par_iter().map(|&l| phase_space_counts(v, l)).collect()
}

/// Λ with `n_cl(Λ) = target`.
pub fn lambda_for_filling(v: &Potential, target: f64, tol: Tolerance) -> Result<f64> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(SemiclassicsError::Normalization(format!(
            "target {target} must be positive"
        )));
    }
    let lo = v.min_value();
    let g = |l: f64| {
        phase_space_counts(v, l)
            .map(|b| b.n_cl - target)
            .unwrap_or(f64::NAN)
    };
    let hi = numerics::expand_bracket(&g, lo, lo + 1.0, 80)
        .ok_or_else(|| SemiclassicsError::Normalization("could not bracket the filling level".into()))?;
    let root = numerics::find_root_monotone(g, lo, hi, tol)
        .map_err(|e| SemiclassicsError::Normalization(e.to_string()))?;
    Ok(root.x)
}

/// Threshold on the smoothness score above which a kink is reported.
pub const H2_FLAG_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H2Report {
    /// Interior grid levels where a derivative was estimated.
    pub lambdas: Vec<f64>,
    pub n_cl: Vec<f64>,
    /// Central-difference estimates of d n_cl/dΛ.
    pub derivative: Vec<f64>,
    /// max_i |D_{i+1} − 2D_i + D_{i−1}| / max_i |D_i| (0 when D ≡ 0).
    pub smoothness_score: f64,
    pub suspected_non_differentiable: bool,
    pub points_above_min: usize,
    /// Differentiability is only certified on the sampled grid.
    pub note: String,
}

/// Finite-difference probe of Λ ↦ n_cl(Λ) on a grid.
///
/// A plateau of V at level Λ₀ adds a term ∝ (Λ − Λ₀)₊^{3/2} to n_cl, so the
/// derivative develops a square-root cusp that shows up in the normalised
/// second difference of the derivative estimates.
pub fn h2_probe(v: &Potential, grid: &[f64]) -> Result<H2Report> {
    let budgets = sweep(v, grid)?;
    let n: Vec<f64> = budgets.iter().map(|b| b.n_cl).collect();
    let mut lambdas = Vec::new();
    let mut derivative = Vec::new();
    let mut n_mid = Vec::new();
    for i in 1..grid.len().saturating_sub(1) {
        lambdas.push(grid[i]);
        n_mid.push(n[i]);
        derivative.push((n[i + 1] - n[i - 1]) / (grid[i + 1] - grid[i - 1]));
    }
    let dmax = derivative.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut score = 0.0f64;
    if dmax > 0.0 {
        for i in 1..derivative.len().saturating_sub(1) {
            let s = (derivative[i + 1] - 2.0 * derivative[i] + derivative[i - 1]).abs() / dmax;
            score = score.max(s);
        }
    }
    let above = grid.iter().filter(|&&l| l > v.min_value()).count();
    let mut note = String::from("differentiability probed on the sampled grid only");
    if above < 8 {
        note.push_str("; fewer than 8 levels above min V");
    }
    Ok(H2Report {
        lambdas,
        n_cl: n_mid,
        derivative,
        smoothness_score: score,
        suspected_non_differentiable: score > H2_FLAG_THRESHOLD,
        points_above_min: above,
        note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegendreRow {
    pub lambda: f64,
    pub de_dlambda: f64,
    pub lambda_dn_dlambda: f64,
    /// |de/dΛ − Λ dn/dΛ| / (Λ |dn/dΛ|), 0 when both vanish.
    pub relative_residual: f64,
}

/// Step of the central differences used by [`legendre_check`].
pub const LEGENDRE_STEP: f64 = 1e-3;

/// Compares `d e_cl/dΛ` with `Λ d n_cl/dΛ` at each level using a local
/// central difference of width [`LEGENDRE_STEP`].
pub fn legendre_check(v: &Potential, lambdas: &[f64]) -> Result<Vec<LegendreRow>> {
    lambdas
        .par_iter()
        .map(|&l| {
            let h = LEGENDRE_STEP * l.abs().max(1.0);
            let up = phase_space_counts(v, l + h)?;
            let dn = phase_space_counts(v, l - h)?;
            let de = (up.e_cl - dn.e_cl) / (2.0 * h);
            let ldn = l * (up.n_cl - dn.n_cl) / (2.0 * h);
            let denom = ldn.abs();
            let relative_residual = if denom == 0.0 {
                if de == 0.0 { 0.0 } else { f64::INFINITY }
            } else {
                (de - ldn).abs() / denom
            };
            Ok(LegendreRow {
                lambda: l,
                de_dlambda: de,
                lambda_dn_dlambda: ldn,
                relative_residual,
            })
        })
        .collect()
}
