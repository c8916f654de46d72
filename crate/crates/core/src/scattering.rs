//! Zero-energy scattering for radial, compactly supported, nonnegative
//! interactions, plus the cutoff functions used in the Dyson-type bound.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, NumericsError, RadialProfile, Tail, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatteringError {
    #[error("invalid interaction: {0}")]
    Config(String),
    #[error("interaction is unbounded or not finite near r = {r}; reduce the step or regularize")]
    Stiffness { r: f64 },
    #[error("u'(R) = {derivative} <= 0: non-physical solution")]
    NonPhysical { derivative: f64 },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, ScatteringError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum InteractionShape {
    Zero,
    /// 1 on `r ≤ range`.
    Step,
    /// `(1 − (r/range)²)²` on `r ≤ range`.
    Bump,
    /// Piecewise-linear table on `[0, range]`, radii in units of `range`.
    Table { radii: Vec<f64>, values: Vec<f64> },
    /// Infinite wall on `r ≤ range`.
    HardCore,
}

/// `v(r) = amplitude · shape(r)` supported in `r ≤ range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInteraction")]
pub struct InteractionSpec {
    #[serde(flatten)]
    pub shape: InteractionShape,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub range: f64,
}

fn one() -> f64 {
    1.0
}

// Flattened enums cannot reject unknown keys, so input goes through a flat
// record first.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInteraction {
    shape: String,
    #[serde(default = "one")]
    amplitude: f64,
    #[serde(default = "one")]
    range: f64,
    radii: Option<Vec<f64>>,
    values: Option<Vec<f64>>,
}

impl TryFrom<RawInteraction> for InteractionSpec {
    type Error = String;

    fn try_from(raw: RawInteraction) -> std::result::Result<Self, String> {
        let table_keys = raw.radii.is_some() || raw.values.is_some();
        let shape = match raw.shape.as_str() {
            "zero" => InteractionShape::Zero,
            "step" => InteractionShape::Step,
            "bump" => InteractionShape::Bump,
            "hard_core" => InteractionShape::HardCore,
            "table" => {
                return Ok(InteractionSpec {
                    shape: InteractionShape::Table {
                        radii: raw.radii.ok_or("table shape needs `radii`")?,
                        values: raw.values.ok_or("table shape needs `values`")?,
                    },
                    amplitude: raw.amplitude,
                    range: raw.range,
                })
            }
            other => return Err(format!("unknown interaction shape `{other}`")),
        };
        if table_keys {
            return Err(format!("`radii`/`values` only apply to the table shape, not `{}`", raw.shape));
        }
        Ok(InteractionSpec {
            shape,
            amplitude: raw.amplitude,
            range: raw.range,
        })
    }
}

impl InteractionSpec {
    pub fn step(amplitude: f64, range: f64) -> Self {
        InteractionSpec {
            shape: InteractionShape::Step,
            amplitude,
            range,
        }
    }

    pub fn zero() -> Self {
        InteractionSpec {
            shape: InteractionShape::Zero,
            amplitude: 0.0,
            range: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.range > 0.0) || !self.range.is_finite() {
            return Err(ScatteringError::Config(format!("range must be positive, got {}", self.range)));
        }
        if !(self.amplitude >= 0.0) {
            return Err(ScatteringError::Config(format!(
                "amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        if let InteractionShape::Table { radii, values } = &self.shape {
            if radii.len() != values.len() || radii.len() < 2 {
                return Err(ScatteringError::Config("table needs matching radii/values, at least 2".into()));
            }
            if radii[0] != 0.0 || (radii[radii.len() - 1] - 1.0).abs() > 1e-12 {
                return Err(ScatteringError::Config("table radii must span [0, 1]".into()));
            }
            if radii.windows(2).any(|w| w[1] <= w[0]) {
                return Err(ScatteringError::Config("table radii must increase strictly".into()));
            }
            if values.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(ScatteringError::Config("table values must be finite and >= 0".into()));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.shape, InteractionShape::Zero)
            || (self.amplitude == 0.0 && !matches!(self.shape, InteractionShape::HardCore))
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        InteractionSpec {
            amplitude,
            ..self.clone()
        }
    }

    /// `c · v(r / ℓ)`: amplitude times `c`, range times `ℓ`.
    pub fn dilate(&self, amplitude_factor: f64, length_factor: f64) -> Self {
        InteractionSpec {
            shape: self.shape.clone(),
            amplitude: self.amplitude * amplitude_factor,
            range: self.range * length_factor,
        }
    }

    /// Smallest R with `supp v ⊂ B(0, R)`, as declared.
    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r > self.range {
            return 0.0;
        }
        let t = r / self.range;
        match &self.shape {
            InteractionShape::Zero => 0.0,
            InteractionShape::Step => self.amplitude,
            InteractionShape::Bump => self.amplitude * (1.0 - t * t).powi(2),
            InteractionShape::Table { radii, values } => {
                let i = radii.partition_point(|&x| x < t).clamp(1, radii.len() - 1);
                let s = (t - radii[i - 1]) / (radii[i] - radii[i - 1]);
                self.amplitude * (values[i - 1] + s * (values[i] - values[i - 1]))
            }
            InteractionShape::HardCore => f64::INFINITY,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            InteractionShape::Table { radii, .. } => radii.iter().map(|t| t * self.range).collect(),
            _ => vec![0.0, self.range],
        }
    }

    fn max_value(&self) -> f64 {
        match &self.shape {
            InteractionShape::Table { values, .. } => self.amplitude * values.iter().cloned().fold(0.0, f64::max),
            InteractionShape::Zero => 0.0,
            InteractionShape::HardCore => f64::INFINITY,
            _ => self.amplitude,
        }
    }
}

/// Solution of `u'' = ½ v u`, `u(0) = 0`, normalised so `u(r) = r − a` for
/// `r ≥ R_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSolution {
    pub a: f64,
    pub range: f64,
    /// `u(r) = r f(r)` on `[0, r_max]`.
    pub u: RadialProfile,
    /// max |u(r) − (r − a)| over the exterior nodes.
    pub fit_residual: f64,
    /// |a(h) − a(h/2)| from the step-halving check.
    pub richardson_error: f64,
    /// Interior samples `(r, u, u')` on the uniform steps of each segment.
    interior: Vec<Vec<(f64, f64, f64)>>,
    spec: InteractionSpec,
}

/// RK4 integration of `u'' = ½v u` over the segments, with periodic
/// rescaling. Returns samples per segment plus the log of the accumulated
/// scale at the end.
fn integrate_ode(
    v: &InteractionSpec,
    steps_per_unit_scale: f64,
) -> Result<(Vec<Vec<(f64, f64, f64)>>, f64)> {
    let kmax = (0.5 * v.max_value()).sqrt();
    let r_v = v.range;
    let h_target = (r_v / steps_per_unit_scale).min(if kmax > 0.0 { 0.05 / kmax } else { f64::INFINITY });
    let mut bps = v.breakpoints();
    bps.dedup();
    let total_steps = (r_v / h_target).ceil();
    if !(total_steps < 5e7) {
        return Err(ScatteringError::Stiffness { r: 0.0 });
    }
    let f = |r: f64, u: f64, du: f64| (du, 0.5 * v.eval(r) * u);
    let (mut u, mut du) = (0.0f64, 1.0f64);
    let mut log_scale = 0.0f64;
    let mut segments = Vec::new();
    for w in bps.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ((b - a) / h_target).ceil().max(2.0) as usize;
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut seg = Vec::with_capacity(n + 1);
        // Segment-local scale so stored samples stay finite.
        let mut seg_log = 0.0f64;
        seg.push((a, u, du));
        for i in 0..n {
            let r = a + h * i as f64;
            // One-sided evaluation keeps each segment on one branch of v.
            let rl = r.max(a + 1e-15 * h);
            let rr = (r + h).min(b - 1e-15 * h);
            let rm = r + 0.5 * h;
            let (k1u, k1d) = f(rl, u, du);
            let (k2u, k2d) = f(rm, u + 0.5 * h * k1u, du + 0.5 * h * k1d);
            let (k3u, k3d) = f(rm, u + 0.5 * h * k2u, du + 0.5 * h * k2d);
            let (k4u, k4d) = f(rr, u + h * k3u, du + h * k3d);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            du += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            if !u.is_finite() || !du.is_finite() {
                return Err(ScatteringError::Stiffness { r: r + h });
            }
            let m = u.abs().max(du.abs());
            if m > 1e100 {
                u /= m;
                du /= m;
                seg_log += m.ln();
                let inv = 1.0 / m;
                for s in seg.iter_mut() {
                    s.1 *= inv;
                    s.2 *= inv;
                }
            }
            seg.push((a + h * (i + 1) as f64, u, du));
        }
        log_scale += seg_log;
        // Earlier segments are now relatively tiny; rescale them.
        if seg_log > 0.0 {
            let k = (-seg_log).exp();
            for prev in segments.iter_mut() {
                for s in prev as &mut Vec<(f64, f64, f64)> {
                    s.1 *= k;
                    s.2 *= k;
                }
            }
        }
        segments.push(seg);
    }
    Ok((segments, log_scale))
}

const STEPS_PER_RANGE: f64 = 2000.0;
const INTERIOR_NODES: usize = 400;
const EXTERIOR_NODES: usize = 400;

/// Solves the zero-energy equation outward and extracts
/// `a = R − u(R)/u'(R)` at the range.
pub fn zero_energy_solve(v: &InteractionSpec, r_max: f64, tol: Tolerance) -> Result<ScatteringSolution> {
    v.validate()?;
    tol.validate()?;
    let r_v = v.range;
    if !(r_max >= 2.0 * r_v) {
        return Err(ScatteringError::InvalidArgument(format!(
            "r_max = {r_max} must be at least twice the range {r_v}"
        )));
    }
    if v.is_zero() {
        let nodes = numerics::linspace(0.0, r_max, INTERIOR_NODES + EXTERIOR_NODES);
        let u = RadialProfile::from_fn(nodes, |r| r, Tail::Linear { slope: 1.0, intercept: 0.0 })?;
        return Ok(ScatteringSolution {
            a: 0.0,
            range: r_v,
            u,
            fit_residual: 0.0,
            richardson_error: 0.0,
            interior: Vec::new(),
            spec: v.clone(),
        });
    }
    if let InteractionShape::HardCore = v.shape {
        let mut nodes = numerics::linspace(0.0, r_v, INTERIOR_NODES);
        nodes.extend(numerics::linspace(r_v, r_max, EXTERIOR_NODES + 1).into_iter().skip(1));
        let u = RadialProfile::from_fn(nodes, |r| (r - r_v).max(0.0), Tail::Linear { slope: 1.0, intercept: -r_v })?;
        return Ok(ScatteringSolution {
            a: r_v,
            range: r_v,
            u,
            fit_residual: 0.0,
            richardson_error: 0.0,
            interior: Vec::new(),
            spec: v.clone(),
        });
    }
    for r in numerics::linspace(0.0, r_v, 257) {
        if !v.eval(r).is_finite() {
            return Err(ScatteringError::Stiffness { r });
        }
    }

    let extract = |segs: &Vec<Vec<(f64, f64, f64)>>| {
        let &(_, u, du) = segs.last().unwrap().last().unwrap();
        (u, du)
    };
    let (coarse, _) = integrate_ode(v, STEPS_PER_RANGE)?;
    let (fine, _) = integrate_ode(v, 2.0 * STEPS_PER_RANGE)?;
    let (uc, duc) = extract(&coarse);
    let (uf, duf) = extract(&fine);
    if !(duf > 0.0) {
        return Err(ScatteringError::NonPhysical { derivative: duf });
    }
    let a_coarse = r_v - uc / duc;
    let a = r_v - uf / duf;
    let richardson_error = (a - a_coarse).abs();

    // Normalise so that u'(R) = 1, i.e. u = r − a outside.
    let norm = 1.0 / duf;
    let interior: Vec<Vec<(f64, f64, f64)>> = fine
        .iter()
        .map(|seg| seg.iter().map(|&(r, u, du)| (r, u * norm, du * norm)).collect())
        .collect();

    // Exterior: continue RK4 with v = 0 and compare with r − a.
    let h_ext = (r_max - r_v) / EXTERIOR_NODES as f64;
    let (mut u, du) = (uf * norm, 1.0f64);
    let mut ext = Vec::with_capacity(EXTERIOR_NODES);
    let mut fit_residual = 0.0f64;
    for i in 0..EXTERIOR_NODES {
        u += h_ext * du;
        let r = if i + 1 == EXTERIOR_NODES { r_max } else { r_v + h_ext * (i + 1) as f64 };
        fit_residual = fit_residual.max((u - (r - a)).abs());
        ext.push((r, u));
    }

    let flat: Vec<(f64, f64)> = interior
        .iter()
        .flat_map(|seg| seg.iter().map(|&(r, u, _)| (r, u)))
        .collect();
    let stride = (flat.len() / INTERIOR_NODES).max(1);
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (i, &(r, u)) in flat.iter().enumerate() {
        if (i % stride == 0 || i + 1 == flat.len()) && nodes.last().is_none_or(|&l| r > l) {
            nodes.push(r);
            values.push(u);
        }
    }
    for (r, u) in ext {
        if r > *nodes.last().unwrap() {
            nodes.push(r);
            values.push(u);
        }
    }
    let profile = RadialProfile::new(nodes, values, Tail::Linear { slope: 1.0, intercept: -a })?;
    Ok(ScatteringSolution {
        a,
        range: r_v,
        u: profile,
        fit_residual,
        richardson_error,
        interior,
        spec: v.clone(),
    })
}

impl ScatteringSolution {
    /// `f = u / r` at radius `r > 0`.
    pub fn f(&self, r: f64) -> f64 {
        if r <= 0.0 {
            let v0 = self.u.values().get(1).copied().unwrap_or(0.0);
            let r1 = self.u.nodes().get(1).copied().unwrap_or(1.0);
            return v0 / r1;
        }
        self.u.eval(r) / r
    }

    /// `∫(|∇f|² + ½v f²) dx` from the interior samples plus the exact
    /// exterior contribution `4πa²/R`.
    pub fn scattering_energy(&self) -> f64 {
        if self.interior.is_empty() {
            return if self.spec.is_zero() { 0.0 } else { 4.0 * PI * self.a };
        }
        let mut total = 0.0;
        for seg in &self.interior {
            let h = seg[1].0 - seg[0].0;
            let vals: Vec<f64> = seg
                .iter()
                .map(|&(r, u, du)| {
                    // r²f'² = (u' − u/r)², r²f² = u²
                    let grad = if r > 0.0 { du - u / r } else { 0.0 };
                    let vr = if r == seg[0].0 {
                        self.spec.eval(r + 1e-12 * h)
                    } else if r == seg[seg.len() - 1].0 {
                        self.spec.eval(r - 1e-12 * h)
                    } else {
                        self.spec.eval(r)
                    };
                    grad * grad + 0.5 * vr * u * u
                })
                .collect();
            total += numerics::simpson_uniform(&vals, h);
        }
        4.0 * PI * (total + self.a * self.a / self.range)
    }

    pub fn spec(&self) -> &InteractionSpec {
        &self.spec
    }

    /// Rows `(r, u, f, v)` at the profile nodes.
    pub fn rows(&self) -> Vec<[f64; 4]> {
        self.u
            .nodes()
            .iter()
            .zip(self.u.values())
            .map(|(&r, &u)| [r, u, if r > 0.0 { u / r } else { self.f(0.0) }, self.spec.eval(r)])
            .collect()
    }
}

/// Default outer radius used when only the scattering length is needed.
pub fn default_r_max(v: &InteractionSpec) -> f64 {
    2.0 * v.range
}

/// Scattering lengths of `A·v` along increasing amplitudes.
pub fn hardcore_limit(v: &InteractionSpec, amplitudes: &[f64], tol: Tolerance) -> Result<Vec<(f64, f64)>> {
    if amplitudes.iter().any(|a| !(*a > 0.0)) {
        return Err(ScatteringError::InvalidArgument("amplitudes must be positive".into()));
    }
    if amplitudes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ScatteringError::InvalidArgument("amplitudes must increase".into()));
    }
    amplitudes
        .par_iter()
        .map(|&amp| {
            let w = v.with_amplitude(amp);
            zero_energy_solve(&w, default_r_max(&w), tol).map(|s| (amp, s.a))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

/// Compares the scattering length of `ℏ^{-2}N^{2β−2/3}w(N^β·)` with
/// `ℏ = N^{-1/3}`, solved directly, against `N^{-β}a_w`.
pub fn scaled_identity_check(w: &InteractionSpec, n: u64, beta: f64, tol: Tolerance) -> Result<ScaledIdentity> {
    if n < 1 {
        return Err(ScatteringError::InvalidArgument("N must be >= 1".into()));
    }
    let nf = n as f64;
    let hbar = nf.powf(-1.0 / 3.0);
    let amp = hbar.powi(-2) * nf.powf(2.0 * beta - 2.0 / 3.0);
    let scaled = w.dilate(amp, nf.powf(-beta));
    let lhs = zero_energy_solve(&scaled, default_r_max(&scaled), tol)?.a;
    let a_w = zero_energy_solve(w, default_r_max(w), tol)?.a;
    let rhs = nf.powf(-beta) * a_w;
    let rel_err = if rhs == 0.0 && lhs == 0.0 { 0.0 } else { (lhs - rhs).abs() / rhs.abs() };
    Ok(ScaledIdentity { lhs, rhs, rel_err })
}

/// `N^β · a(ℏ^{-2}N^α w(N^β·))` for each N, solved directly.
pub fn corollary_sequence(w: &InteractionSpec, alpha: f64, beta: f64, ns: &[u64], tol: Tolerance) -> Result<Vec<(u64, f64)>> {
    ns.par_iter()
        .map(|&n| {
            let nf = n as f64;
            let scaled = w.dilate(nf.powf(2.0 / 3.0 + alpha), nf.powf(-beta));
            zero_energy_solve(&scaled, default_r_max(&scaled), tol).map(|s| (n, nf.powf(beta) * s.a))
        })
        .collect()
}

/// Ingredients of the Dyson-type replacement: the spread potential `U_R`,
/// the high-momentum cutoff `χ_s` and the kinetic weight `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DysonKit {
    pub r0: f64,
    pub r: f64,
    pub s: f64,
    pub p_f: f64,
    /// Quadrature value of ∫U_R.
    pub u_integral: f64,
}

impl DysonKit {
    /// `1{R₀ ≤ |x| ≤ R}·3/(4π(R³ − R₀³))`.
    pub fn u_r(&self, x: f64) -> f64 {
        if x >= self.r0 && x <= self.r {
            3.0 / (4.0 * PI * (self.r.powi(3) - self.r0.powi(3)))
        } else {
            0.0
        }
    }

    /// `(sp − 1)` on `1 ≤ sp ≤ 2`, 1 above, 0 below.
    pub fn chi_s(&self, p: f64) -> f64 {
        let t = self.s * p;
        if t < 1.0 {
            0.0
        } else if t <= 2.0 {
            t - 1.0
        } else {
            1.0
        }
    }

    /// `max(1 − p_F²/p², 0)`.
    pub fn gamma(&self, p: f64) -> f64 {
        if p <= 0.0 {
            0.0
        } else {
            (1.0 - self.p_f * self.p_f / (p * p)).max(0.0)
        }
    }

    /// Momenta in `grid` where `Γ(p) < (1 − s²p_F²)χ_s(p)²`.
    pub fn gamma_violations(&self, grid: &[f64]) -> Vec<f64> {
        let c = 1.0 - self.s * self.s * self.p_f * self.p_f;
        grid.iter()
            .copied()
            .filter(|&p| self.gamma(p) < c * self.chi_s(p).powi(2))
            .collect()
    }
}

pub fn dyson_parts(r0: f64, r: f64, s: f64, p_f: f64) -> Result<DysonKit> {
    if !(r0 >= 0.0) || !(r > r0) || !r.is_finite() {
        return Err(ScatteringError::Geometry(format!("need R > R0 >= 0, got R0 = {r0}, R = {r}")));
    }
    if !(s > 0.0) || !(p_f > 0.0) {
        return Err(ScatteringError::InvalidArgument(format!("s = {s} and p_F = {p_f} must be positive")));
    }
    let mut kit = DysonKit {
        r0,
        r,
        s,
        p_f,
        u_integral: 0.0,
    };
    let tol = Tolerance::new(1e-15, 1e-13, 200)?;
    kit.u_integral = numerics::integrate_radial_with_breaks(|x| kit.u_r(x), r, &[r0], tol)?;
    Ok(kit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn interaction_schema() {
        let w: InteractionSpec = serde_json::from_str(r#"{"shape": "step", "amplitude": 2.0}"#).unwrap();
        assert_eq!(w, InteractionSpec::step(2.0, 1.0));
        let back: InteractionSpec = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(back, w);
        let t: InteractionSpec =
            serde_json::from_str(r#"{"shape": "table", "radii": [0.0, 1.0], "values": [1.0, 0.0]}"#).unwrap();
        assert!(matches!(t.shape, InteractionShape::Table { .. }));
        assert!(serde_json::from_str::<InteractionSpec>(r#"{"shape": "step", "ampl": 2.0}"#).is_err());
        assert!(serde_json::from_str::<InteractionSpec>(r#"{"shape": "step", "radii": [0.0]}"#).is_err());
        assert!(serde_json::from_str::<InteractionSpec>(r#"{"shape": "wedge"}"#).is_err());
    }

    fn barrier(a: f64) -> f64 {
        let k = (a / 2.0).sqrt();
        1.0 - k.tanh() / k
    }

    #[test]
    fn free_equation() {
        let s = zero_energy_solve(&InteractionSpec::zero(), 2.0, tol()).unwrap();
        assert_eq!(s.a, 0.0);
        assert!((s.f(1.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_barrier_closed_forms() {
        for amp in [2.0, 200.0] {
            let s = zero_energy_solve(&InteractionSpec::step(amp, 1.0), 2.0, tol()).unwrap();
            assert!((s.a - barrier(amp)).abs() < 1e-9, "A = {amp}: {} vs {}", s.a, barrier(amp));
            assert!(s.fit_residual <= 1e-8 * 2.0);
            assert!(s.richardson_error < 1e-9);
        }
        assert!((barrier(2.0) - 0.238_406).abs() < 1e-6);
    }

    #[test]
    fn huge_amplitude_does_not_overflow() {
        let s = zero_energy_solve(&InteractionSpec::step(1e6, 1.0), 2.0, tol()).unwrap();
        assert!((s.a - barrier(1e6)).abs() < 1e-8);
        assert!(1.0 - s.a < 0.002);
    }

    #[test]
    fn hard_core_sets_a_to_radius() {
        let v = InteractionSpec {
            shape: InteractionShape::HardCore,
            amplitude: 1.0,
            range: 0.7,
        };
        let s = zero_energy_solve(&v, 1.4, tol()).unwrap();
        assert_eq!(s.a, 0.7);
    }

    #[test]
    fn profile_bounds() {
        let s = zero_energy_solve(&InteractionSpec::step(20.0, 1.0), 3.0, tol()).unwrap();
        for (&r, &u) in s.u.nodes().iter().zip(s.u.values()) {
            if r > 0.0 {
                assert!(u / r <= 1.0 + 1e-12);
            }
            if r >= 1.0 {
                assert!(u / r >= 1.0 - s.a / r - 1e-8);
            }
        }
    }

    #[test]
    fn energy_identity_for_barrier_and_bump() {
        for v in [
            InteractionSpec::step(2.0, 1.0),
            InteractionSpec::step(200.0, 1.0),
            InteractionSpec {
                shape: InteractionShape::Bump,
                amplitude: 30.0,
                range: 1.5,
            },
        ] {
            let s = zero_energy_solve(&v, 2.0 * v.range, tol()).unwrap();
            let e = s.scattering_energy();
            assert!((e - 4.0 * PI * s.a).abs() <= 1e-6 * 4.0 * PI * s.a, "{e} vs {}", 4.0 * PI * s.a);
        }
    }

    #[test]
    fn table_matches_step() {
        let v = InteractionSpec {
            shape: InteractionShape::Table {
                radii: vec![0.0, 0.5, 1.0],
                values: vec![1.0, 1.0, 1.0],
            },
            amplitude: 2.0,
            range: 1.0,
        };
        let s = zero_energy_solve(&v, 2.0, tol()).unwrap();
        assert!((s.a - barrier(2.0)).abs() < 1e-9);
    }

    #[test]
    fn hardcore_sequence() {
        let v = InteractionSpec::step(1.0, 1.0);
        let out = hardcore_limit(&v, &[2.0, 20.0, 200.0], tol()).unwrap();
        for (amp, a) in &out {
            assert!((a - barrier(*amp)).abs() < 1e-8);
        }
        assert!(out[0].1 < out[1].1 && out[1].1 < out[2].1);
        assert!((out[1].1 - 0.684_903_4).abs() < 1e-6);
    }

    #[test]
    fn dilation_identity() {
        let w = InteractionSpec::step(2.0, 1.0);
        let c = scaled_identity_check(&w, 1000, 0.4, tol()).unwrap();
        assert!(c.rel_err <= 1e-8, "{c:?}");
        let z = scaled_identity_check(&InteractionSpec::zero(), 1000, 0.4, tol()).unwrap();
        assert_eq!((z.lhs, z.rhs, z.rel_err), (0.0, 0.0, 0.0));
        let one = scaled_identity_check(&w, 1, 0.4, tol()).unwrap();
        assert_eq!(one.lhs, one.rhs);
    }

    #[test]
    fn corollary_trend_approaches_range() {
        let w = InteractionSpec::step(2.0, 1.0);
        let beta = 0.4;
        let alpha = 2.0 * beta - 2.0 / 3.0 + 0.5;
        let seq = corollary_sequence(&w, alpha, beta, &[100, 1000, 10000], tol()).unwrap();
        for win in seq.windows(2) {
            assert!(win[1].1 > win[0].1);
        }
        assert!(seq.iter().all(|(_, x)| *x <= 1.0));
    }

    #[test]
    fn dyson_kit_values() {
        let k = dyson_parts(0.0, 1.0, 0.5, 1.0).unwrap();
        assert!((k.u_integral - 1.0).abs() < 1e-10);
        assert!((k.u_r(0.5) - 3.0 / (4.0 * PI)).abs() < 1e-15);
        assert_eq!(k.chi_s(6.0), 1.0);
        assert_eq!(k.chi_s(1.0), 0.0);
        let k2 = dyson_parts(0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((k2.chi_s(1.5) - 0.5).abs() < 1e-15);
        assert_eq!(k2.chi_s(0.5), 0.0);
        assert!(dyson_parts(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn dyson_gamma_bound_on_grid() {
        let p_f = 3.0;
        let k = dyson_parts(0.1, 0.5, 1.0 / (2.0 * p_f), p_f).unwrap();
        let grid = numerics::linspace(1e-3, 20.0 * p_f, 10_000);
        assert!(k.gamma_violations(&grid).is_empty());
    }

    #[test]
    fn rejects_short_domain() {
        assert!(zero_energy_solve(&InteractionSpec::step(2.0, 1.0), 1.5, tol()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn monotone_in_amplitude(a in 0.1f64..500.0, f in 1.01f64..10.0) {
            let v = InteractionSpec { shape: InteractionShape::Bump, amplitude: a, range: 1.0 };
            let lo = zero_energy_solve(&v, 2.0, tol()).unwrap().a;
            let hi = zero_energy_solve(&v.with_amplitude(a * f), 2.0, tol()).unwrap().a;
            prop_assert!(hi >= lo);
            prop_assert!(hi <= 1.0 && lo >= 0.0);
        }

        #[test]
        fn gamma_dominates_cutoff_square(p_f in 0.1f64..50.0, scale in 1.0f64..4.0) {
            let k = dyson_parts(0.0, 1.0, 1.0 / (scale * p_f), p_f).unwrap();
            let grid = numerics::linspace(1e-4, 30.0 * p_f, 2000);
            prop_assert!(k.gamma_violations(&grid).is_empty());
        }
    }
}
