//! Large-N energy asymptotics: the leading prediction with its
//! scattering-length correction, the box-tiling upper-bound estimator, the
//! admissible windows for β and the box side l, and the error budget f(N).

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, NumericsError, Tolerance};
use crate::potentials::Potential;
use crate::scattering::{self, InteractionSpec, ScatteringError};
use crate::thomas_fermi::{self, c_tf, TFSolution, TfError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error("invalid scaling context: {0}")]
    Context(String),
    #[error("beta = {beta} lies outside the regime ({lo}, {hi})")]
    Regime { beta: f64, lo: f64, hi: f64 },
    #[error("degenerate tiling: {0}")]
    DegenerateTiling(String),
    #[error("cannot parse beta from {0:?}")]
    BetaParse(String),
    #[error(transparent)]
    Tf(#[from] TfError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, AsymptoticsError>;

/// Particle number, dilution exponent and the two-body interaction `w`
/// with its scattering length and range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingContext {
    pub n: u64,
    pub beta: f64,
    pub hbar: f64,
    pub interaction: InteractionSpec,
    pub a_w: f64,
    pub r_w: f64,
}

impl ScalingContext {
    /// Solves the zero-energy scattering problem of `w` for `a_w`.
    pub fn new(n: u64, beta: f64, interaction: InteractionSpec, tol: Tolerance) -> Result<Self> {
        let a_w = if interaction.is_zero() {
            0.0
        } else {
            scattering::zero_energy_solve(&interaction, scattering::default_r_max(&interaction), tol)?.a
        };
        Self::with_scattering_length(n, beta, interaction, a_w)
    }

    pub fn with_scattering_length(n: u64, beta: f64, interaction: InteractionSpec, a_w: f64) -> Result<Self> {
        if n < 2 {
            return Err(AsymptoticsError::Context(format!("N = {n} must be at least 2")));
        }
        if !(beta > 1.0 / 3.0) || !beta.is_finite() {
            return Err(AsymptoticsError::Context(format!("beta = {beta} must exceed 1/3")));
        }
        if !(a_w >= 0.0) {
            return Err(AsymptoticsError::Context(format!("a_w = {a_w} must be nonnegative")));
        }
        let r_w = interaction.range();
        Ok(ScalingContext {
            n,
            beta,
            hbar: (n as f64).powf(-1.0 / 3.0),
            interaction,
            a_w,
            r_w,
        })
    }

    pub fn with_n(&self, n: u64) -> Result<Self> {
        Self::with_scattering_length(n, self.beta, self.interaction.clone(), self.a_w)
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// N^{1/3−β}
    pub fn dilution(&self) -> f64 {
        self.nf().powf(1.0 / 3.0 - self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPrediction {
    pub n: u64,
    pub beta: f64,
    pub main: f64,
    pub correction: f64,
    pub total: f64,
    pub relative_correction: f64,
}

/// `N·E^TF + 2π a_w N^{4/3−β} ∫(ρ^TF)²`.
pub fn prediction_from(sol: &TFSolution, ctx: &ScalingContext) -> EnergyPrediction {
    let main = ctx.nf() * sol.e_tf;
    let correction = 2.0 * std::f64::consts::PI * ctx.a_w * ctx.nf().powf(4.0 / 3.0 - ctx.beta) * sol.interaction_integral;
    EnergyPrediction {
        n: ctx.n,
        beta: ctx.beta,
        main,
        correction,
        total: main + correction,
        relative_correction: correction / main,
    }
}

pub fn predict_energy(v: &Potential, ctx: &ScalingContext, tol: Tolerance) -> Result<EnergyPrediction> {
    let sol = thomas_fermi::tf_solve(v, tol)?;
    Ok(prediction_from(&sol, ctx))
}

/// Parses `"34/81"`, `"2/5"` or a decimal such as `"0.40"` into an exact
/// rational.
pub fn parse_beta(s: &str) -> Result<Ratio<i64>> {
    let t = s.trim();
    let bad = || AsymptoticsError::BetaParse(s.to_string());
    if let Some((a, b)) = t.split_once('/') {
        let num: i64 = a.trim().parse().map_err(|_| bad())?;
        let den: i64 = b.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(num, den));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if frac.len() > 15 || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let num: i64 = digits.parse().map_err(|_| bad())?;
    let den = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    let r = Ratio::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Closest small-denominator rational to a float.
pub fn beta_from_f64(beta: f64) -> Result<Ratio<i64>> {
    Ratio::approximate_float(beta).ok_or_else(|| AsymptoticsError::BetaParse(beta.to_string()))
}

fn to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaWindow {
    pub beta: f64,
    pub beta_exact: String,
    pub n: u64,
    /// 1/3 − β
    pub e_hi: f64,
    /// −(27/21)(1 − 3β) − β
    pub e_lo1: f64,
    /// β/3 − 4/9
    pub e_lo2: f64,
    /// e_hi > max(e_lo1, e_lo2), decided in exact arithmetic.
    pub feasible: bool,
    /// β < 1/2.
    pub lower_bound_regime: bool,
    /// N^{(e_hi + max(e_lo1, e_lo2))/2} when feasible.
    pub l: Option<f64>,
}

/// Exponent window `N^{1/3−β} ≫ l ≫ N^{−(27/21)(1−3β)−β}, N^{β/3−4/9}`.
pub fn beta_l_window(beta: Ratio<i64>, n: u64) -> BetaWindow {
    let r = |a: i64, b: i64| Ratio::new(a, b);
    let one = r(1, 1);
    let e_hi = r(1, 3) - beta;
    let e_lo1 = -r(27, 21) * (one - r(3, 1) * beta) - beta;
    let e_lo2 = beta / r(3, 1) - r(4, 9);
    let lo = if e_lo1 > e_lo2 { e_lo1 } else { e_lo2 };
    let feasible = e_hi > lo;
    let l = feasible.then(|| (n as f64).powf(to_f64((e_hi + lo) / r(2, 1))));
    BetaWindow {
        beta: to_f64(beta),
        beta_exact: format!("{}/{}", beta.numer(), beta.denom()),
        n,
        e_hi: to_f64(e_hi),
        e_lo1: to_f64(e_lo1),
        e_lo2: to_f64(e_lo2),
        feasible,
        lower_bound_regime: beta < r(1, 2),
        l,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCell {
    pub center: [f64; 3],
    /// ∫ρ^TF over the cell of side l + r around the box.
    pub cell_mass: f64,
    /// ⌈(N/2)·cell_mass⌉
    pub m: u64,
    pub sup_v: f64,
    pub kinetic_interaction: f64,
    pub potential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxEstimate {
    pub n: u64,
    pub beta: f64,
    pub l: f64,
    pub r: f64,
    pub pitch: f64,
    pub r_over_l: f64,
    pub boxes: Vec<BoxCell>,
    /// Σ 2M_i
    pub particles: u64,
    pub kinetic_interaction: f64,
    pub potential: f64,
    pub total: f64,
    pub prediction_total: f64,
    pub ratio: f64,
    /// Σ(2M_i/N)^{5/3}/pitch² against ∫(ρ^TF)^{5/3}.
    pub sigma_rho_5_3: f64,
    pub continuum_rho_5_3: f64,
    /// Σ(2M_i/N)²/pitch³ against ∫(ρ^TF)².
    pub sigma_rho_2: f64,
    pub continuum_rho_2: f64,
    pub window: Option<BetaWindow>,
}

impl BoxEstimate {
    pub fn defect_5_3(&self) -> f64 {
        (self.sigma_rho_5_3 - self.continuum_rho_5_3).abs() / self.continuum_rho_5_3
    }

    pub fn defect_2(&self) -> f64 {
        (self.sigma_rho_2 - self.continuum_rho_2).abs() / self.continuum_rho_2
    }
}

/// Tiles the bounding box of supp ρ^TF with boxes of side `l` separated by
/// gaps `r = N^{-β}R_w`. Each box is charged with the TF mass of its cell
/// (box plus half the surrounding gap), so the cells tile space and
/// Σ 2M_i ≥ N.
pub fn box_estimate(sol: &TFSolution, ctx: &ScalingContext, l: f64) -> Result<BoxEstimate> {
    let v = &sol.potential;
    let half = v.sublevel_half_widths(sol.lambda_tf);
    let diameter = 2.0 * half.iter().cloned().fold(0.0, f64::max);
    if !(l > 0.0) || l > diameter {
        return Err(AsymptoticsError::DegenerateTiling(format!(
            "box side {l} must lie in (0, {diameter}]"
        )));
    }
    let nf = ctx.nf();
    let r = nf.powf(-ctx.beta) * ctx.r_w;
    let pitch = l + r;
    let counts: Vec<usize> = half.iter().map(|h| ((2.0 * h / pitch).ceil() as usize).max(1)).collect();
    let mut centers = Vec::with_capacity(counts.iter().product());
    let coord = |k: usize, j: usize| (j as f64 - (counts[k] - 1) as f64 / 2.0) * pitch;
    for i in 0..counts[0] {
        for j in 0..counts[1] {
            for k in 0..counts[2] {
                centers.push([coord(0, i), coord(1, j), coord(2, k)]);
            }
        }
    }
    let lambda = sol.lambda_tf;
    let big_l = nf.powf(ctx.beta) * l;
    let prefactor = nf.powf(2.0 * ctx.beta - 2.0 / 3.0);
    let ctf = c_tf();
    let a_w = ctx.a_w;
    let rho = |x: [f64; 3]| sol.rho_at(x);
    let level = |x: [f64; 3]| lambda - v.eval(x);
    let boxes: Vec<BoxCell> = centers
        .par_iter()
        .map(|&c| {
            let lo = [c[0] - pitch / 2.0, c[1] - pitch / 2.0, c[2] - pitch / 2.0];
            let hi = [c[0] + pitch / 2.0, c[1] + pitch / 2.0, c[2] + pitch / 2.0];
            // Nearest point of the cell to the origin decides whether the
            // cell can meet the support (V is minimal at the origin for the
            // built-in traps; otherwise integrate every cell).
            let near: f64 = (0..3).map(|k| (c[k].abs() - pitch / 2.0).max(0.0).powi(2)).sum::<f64>().sqrt();
            let cell_mass = if v.is_radial() && near >= sol.support_radius {
                0.0
            } else {
                numerics::integrate_box_kink_aware(&rho, Some(&level), lo, hi, 2, 4)
            };
            let m = ((nf / 2.0) * cell_mass).ceil().max(0.0) as u64;
            let mut sup_v = v.eval(c);
            for s in 0..8 {
                let corner = [
                    c[0] + if s & 1 == 0 { -l / 2.0 } else { l / 2.0 },
                    c[1] + if s & 2 == 0 { -l / 2.0 } else { l / 2.0 },
                    c[2] + if s & 4 == 0 { -l / 2.0 } else { l / 2.0 },
                ];
                sup_v = sup_v.max(v.eval(corner));
            }
            let mf = m as f64;
            let ki = prefactor
                * (2.0 * ctf * big_l.powi(-2) * mf.powf(5.0 / 3.0)
                    + 8.0 * std::f64::consts::PI * a_w * big_l.powi(-3) * mf * mf);
            BoxCell {
                center: c,
                cell_mass,
                m,
                sup_v,
                kinetic_interaction: ki,
                potential: 2.0 * mf * sup_v,
            }
        })
        .filter(|b: &BoxCell| b.m > 0)
        .collect();
    let particles: u64 = boxes.iter().map(|b| 2 * b.m).sum();
    let kinetic_interaction: f64 = boxes.iter().map(|b| b.kinetic_interaction).sum();
    let potential: f64 = boxes.iter().map(|b| b.potential).sum();
    let total = kinetic_interaction + potential;
    let prediction_total = prediction_from(sol, ctx).total;
    let sigma_rho_5_3 = boxes.iter().map(|b| (2.0 * b.m as f64 / nf).powf(5.0 / 3.0)).sum::<f64>() / (pitch * pitch);
    let sigma_rho_2 = boxes.iter().map(|b| (2.0 * b.m as f64 / nf).powi(2)).sum::<f64>() / pitch.powi(3);
    let window = beta_from_f64(ctx.beta).ok().map(|b| beta_l_window(b, ctx.n));
    Ok(BoxEstimate {
        n: ctx.n,
        beta: ctx.beta,
        l,
        r,
        pitch,
        r_over_l: r / l,
        boxes,
        particles,
        kinetic_interaction,
        potential,
        total,
        prediction_total,
        ratio: total / prediction_total,
        sigma_rho_5_3,
        continuum_rho_5_3: sol.kinetic_integral,
        sigma_rho_2,
        continuum_rho_2: sol.interaction_integral,
        window,
    })
}

/// Box estimates along an N sweep, each at the midpoint l of its window.
/// Larger N shrinks l, which refines the Riemann sums.
pub fn box_refinement_sweep(sol: &TFSolution, ctx: &ScalingContext, ns: &[u64]) -> Result<Vec<BoxEstimate>> {
    let beta = beta_from_f64(ctx.beta)?;
    ns.iter()
        .map(|&n| {
            let c = ctx.with_n(n)?;
            let w = beta_l_window(beta, n);
            let l = w.l.ok_or_else(|| {
                AsymptoticsError::DegenerateTiling(format!("no admissible l for beta = {}", ctx.beta))
            })?;
            box_estimate(sol, &c, l)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum EpsilonRule {
    /// ε = (N^{-1/18} + N^{1/6−β/2})^{1/8}
    Default,
    Explicit { epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub n: u64,
    pub beta: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub p_f: f64,
    pub s: f64,
    pub r: f64,
    /// N^{-1/18} + N^{1/6−β/2}
    pub small_sum: f64,
    /// N^{5/6}
    pub term_semiclassical: f64,
    /// p_F^{-2} N
    pub term_momentum_cutoff: f64,
    /// δ^{-1} N^{1/3−β} S (R^{-3} + 1/(ε s² R))
    pub term_localization: f64,
    /// N^{1/3−β}/(ε s² R)
    pub term_dyson: f64,
    pub total: f64,
    /// f(N)/N^{4/3−β}
    pub ratio: f64,
    /// 1 > ε > S^{1/4}
    pub epsilon_admissible: bool,
}

pub fn error_budget(n: u64, beta: f64, rule: EpsilonRule) -> Result<ErrorBudget> {
    if !(beta > 1.0 / 3.0 && beta < 0.5) {
        return Err(AsymptoticsError::Regime {
            beta,
            lo: 1.0 / 3.0,
            hi: 0.5,
        });
    }
    if n < 2 {
        return Err(AsymptoticsError::Context(format!("N = {n} must be at least 2")));
    }
    let nf = n as f64;
    let small_sum = nf.powf(-1.0 / 18.0) + nf.powf(1.0 / 6.0 - beta / 2.0);
    let epsilon = match rule {
        EpsilonRule::Default => small_sum.powf(1.0 / 8.0),
        EpsilonRule::Explicit { epsilon } => {
            if !(epsilon > 0.0) || !epsilon.is_finite() {
                return Err(AsymptoticsError::Context(format!("epsilon = {epsilon} must be positive")));
            }
            epsilon
        }
    };
    let dil = nf.powf(1.0 / 3.0 - beta);
    let hbar = nf.powf(-1.0 / 3.0);
    let delta = epsilon;
    let p_f = (epsilon * dil).powf(-0.5);
    let s = (epsilon * epsilon * dil).sqrt();
    let r = epsilon * hbar;
    let term_semiclassical = nf.powf(5.0 / 6.0);
    let term_momentum_cutoff = nf / (p_f * p_f);
    let esr = epsilon * s * s * r;
    let term_localization = dil * small_sum * (r.powi(-3) + 1.0 / esr) / delta;
    let term_dyson = dil / esr;
    let total = term_semiclassical + term_momentum_cutoff + term_localization + term_dyson;
    Ok(ErrorBudget {
        n,
        beta,
        epsilon,
        delta,
        p_f,
        s,
        r,
        small_sum,
        term_semiclassical,
        term_momentum_cutoff,
        term_localization,
        term_dyson,
        total,
        ratio: total / nf.powf(4.0 / 3.0 - beta),
        epsilon_admissible: epsilon < 1.0 && epsilon > small_sum.powf(0.25),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub n: u64,
    pub g: f64,
    pub two_spin_energy: f64,
    pub first_order: f64,
    /// |E(g) − E^TF − (g/4)∫ρ²| / N^{1/3−β}
    pub scaled_defect: f64,
}

/// Two-spin TF energy at coupling `g = 8π a_w N^{1/3−β}` against
/// `E^TF + 2π a_w N^{1/3−β}∫(ρ^TF)²` along an N sweep.
pub fn first_order_consistency(sol: &TFSolution, ctx: &ScalingContext, ns: &[u64], tol: Tolerance) -> Result<Vec<ConsistencyRow>> {
    ns.par_iter()
        .map(|&n| {
            let c = ctx.with_n(n)?;
            let dil = c.dilution();
            let g = 8.0 * std::f64::consts::PI * c.a_w * dil;
            let st = thomas_fermi::two_spin_minimize(&sol.potential, g, tol)?;
            let first_order = sol.e_tf + 2.0 * std::f64::consts::PI * c.a_w * dil * sol.interaction_integral;
            Ok(ConsistencyRow {
                n,
                g,
                two_spin_energy: st.energy,
                first_order,
                scaled_defect: (st.energy - first_order).abs() / dil,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{make_potential, PotentialSpec};
    use std::f64::consts::PI;

    fn tol() -> Tolerance {
        Tolerance::new(1e-12, 1e-10, 4000).unwrap()
    }

    fn harmonic() -> TFSolution {
        let v = make_potential(&PotentialSpec::Harmonic).unwrap();
        thomas_fermi::tf_solve(&v, tol()).unwrap()
    }

    fn barrier_ctx(n: u64, beta: f64) -> ScalingContext {
        ScalingContext::new(n, beta, InteractionSpec::step(2.0, 1.0), tol()).unwrap()
    }

    #[test]
    fn prediction_composes_constants() {
        let sol = harmonic();
        let ctx = barrier_ctx(1_000_000, 0.4);
        let p = prediction_from(&sol, &ctx);
        let lam = 24f64.powf(1.0 / 3.0);
        let a = 1.0 - 1f64.tanh();
        let i2 = 64.0 / 2835.0 * 24f64.powf(1.5) / PI.powi(3);
        assert!((p.main - 1e6 * 0.75 * lam).abs() < 1e-3);
        let corr = 2.0 * PI * a * 10f64.powf(5.6) * i2;
        assert!((p.correction - corr).abs() < 1e-5 * corr);
        assert!((p.correction - 5.105e4).abs() < 10.0);
    }

    #[test]
    fn zero_interaction_has_no_correction() {
        let sol = harmonic();
        let ctx = ScalingContext::new(1000, 0.4, InteractionSpec::zero(), tol()).unwrap();
        let p = prediction_from(&sol, &ctx);
        assert_eq!(p.correction, 0.0);
        assert_eq!(p.total, p.main);
    }

    #[test]
    fn larger_beta_smaller_correction() {
        let sol = harmonic();
        let a = prediction_from(&sol, &barrier_ctx(10_000, 0.38));
        let b = prediction_from(&sol, &barrier_ctx(10_000, 0.41));
        assert!(b.correction < a.correction);
    }

    #[test]
    fn context_rejects_dense_regime() {
        assert!(ScalingContext::with_scattering_length(100, 1.0 / 3.0, InteractionSpec::zero(), 0.0).is_err());
        assert!(ScalingContext::with_scattering_length(1, 0.4, InteractionSpec::zero(), 0.0).is_err());
    }

    #[test]
    fn beta_parsing() {
        assert_eq!(parse_beta("34/81").unwrap(), Ratio::new(34, 81));
        assert_eq!(parse_beta("0.40").unwrap(), Ratio::new(2, 5));
        assert_eq!(parse_beta(" 0.5").unwrap(), Ratio::new(1, 2));
        assert!(parse_beta("x").is_err());
        assert!(parse_beta("1/0").is_err());
    }

    #[test]
    fn window_boundaries_are_exact() {
        let w = beta_l_window(Ratio::new(34, 81), 1_000_000);
        assert!(!w.feasible);
        assert_eq!(w.e_hi, w.e_lo1);
        assert!(w.l.is_none());
        let below = beta_l_window(Ratio::new(34 * 1000 - 1, 81 * 1000), 1_000_000);
        assert!(below.feasible);
        assert!(beta_l_window(parse_beta("0.40").unwrap(), 10).feasible);
        let w45 = beta_l_window(parse_beta("0.45").unwrap(), 10);
        assert!(!w45.feasible && w45.lower_bound_regime);
        assert!(beta_l_window(Ratio::new(1, 2) - Ratio::new(1, 10_000), 10).lower_bound_regime);
        assert!(!beta_l_window(Ratio::new(1, 2), 10).lower_bound_regime);
    }

    #[test]
    fn window_l_lies_inside() {
        let n = 1_000_000u64;
        let w = beta_l_window(parse_beta("0.4").unwrap(), n);
        let l = w.l.unwrap();
        let nf = n as f64;
        assert!(l < nf.powf(w.e_hi));
        assert!(l > nf.powf(w.e_lo1.max(w.e_lo2)));
    }

    #[test]
    fn single_box_matches_direct_formula() {
        let sol = harmonic();
        let ctx = ScalingContext::with_scattering_length(1000, 0.4, InteractionSpec::step(2.0, 1.0), 0.0).unwrap();
        let l = 2.0 * sol.lambda_tf.sqrt();
        let est = box_estimate(&sol, &ctx, l).unwrap();
        assert_eq!(est.boxes.len(), 1);
        let b = est.boxes[0];
        assert_eq!(b.m, 500);
        let nf = 1000f64;
        let big_l = nf.powf(0.4) * l;
        let direct = nf.powf(0.8 - 2.0 / 3.0) * 2.0 * c_tf() * big_l.powi(-2) * 500f64.powf(5.0 / 3.0);
        assert!((b.kinetic_interaction - direct).abs() < 1e-12 * direct);
        assert!((b.sup_v - 3.0 * sol.lambda_tf).abs() < 1e-12);
        assert!(box_estimate(&sol, &ctx, 1.01 * l).is_err());
    }

    #[test]
    fn box_masses_cover_all_particles() {
        let sol = harmonic();
        for n in [1000u64, 100_000] {
            let ctx = barrier_ctx(n, 0.4);
            let l = beta_l_window(parse_beta("0.4").unwrap(), n).l.unwrap();
            let est = box_estimate(&sol, &ctx, l).unwrap();
            assert!(est.particles >= n);
            let mass: f64 = est.boxes.iter().map(|b| b.cell_mass).sum();
            assert!((mass - 1.0).abs() < 1e-4, "{mass}");
        }
    }

    #[test]
    fn box_ratio_at_large_n() {
        let sol = harmonic();
        let ctx = barrier_ctx(1_000_000, 0.4);
        let w = beta_l_window(parse_beta("0.4").unwrap(), 1_000_000);
        let est = box_estimate(&sol, &ctx, w.l.unwrap()).unwrap();
        assert!(est.ratio >= 0.9 && est.ratio <= 1.3, "{}", est.ratio);
        assert!(est.r_over_l <= 1e6f64.powf(1.0 / 3.0 - 0.4));
    }

    #[test]
    fn budget_bookkeeping() {
        let b = error_budget(10_000, 0.45, EpsilonRule::Explicit { epsilon: 0.5 }).unwrap();
        let parts = [b.term_semiclassical, b.term_momentum_cutoff, b.term_localization, b.term_dyson];
        assert!(parts.iter().all(|p| *p >= 0.0));
        assert_eq!(b.total, parts.iter().sum::<f64>());
        assert!(error_budget(100, 0.5, EpsilonRule::Default).is_err());
        assert!(error_budget(100, 1.0 / 3.0, EpsilonRule::Default).is_err());
    }

    #[test]
    fn budget_coupling_rules() {
        let b = error_budget(1_000_000, 0.4, EpsilonRule::Default).unwrap();
        let nf = 1e6f64;
        assert!((b.delta - b.epsilon).abs() == 0.0);
        assert!((b.p_f.powi(-2) - b.epsilon * nf.powf(1.0 / 3.0 - 0.4)).abs() < 1e-12);
        assert!((b.s * b.s - b.epsilon.powi(2) * nf.powf(1.0 / 3.0 - 0.4)).abs() < 1e-12);
        assert!((b.r - b.epsilon * nf.powf(-1.0 / 3.0)).abs() < 1e-15);
        // p_F^{-2}N/N^{4/3−β} = ε.
        assert!((b.term_momentum_cutoff / nf.powf(4.0 / 3.0 - 0.4) - b.epsilon).abs() < 1e-12);
    }

    #[test]
    fn budget_ratio_decreases() {
        for beta in [0.40, 0.45, 0.49] {
            let r: Vec<f64> = [10_000u64, 1_000_000, 100_000_000]
                .iter()
                .map(|&n| error_budget(n, beta, EpsilonRule::Default).unwrap().ratio)
                .collect();
            assert!(r[1] < r[0] && r[2] < r[1], "beta {beta}: {r:?}");
        }
    }
}
