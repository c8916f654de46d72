//! Trap potentials and sampled diagnostics for their regularity bounds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, NumericsError, RadialProfile, Tail, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("invalid potential configuration: {0}")]
    Config(String),
    #[error("diagnostic unsupported: {0}")]
    UnsupportedDiagnostic(String),
}

/// Configuration entry naming a trap family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `|x|²` with no offset. Violates `V ≥ 1`; kept for closed-form tests.
    Harmonic,
    /// `1 + |x|²`.
    HarmonicPlusOne,
    /// `1 + |x|^s`, `s > 1`.
    PowerPlusOne { s: f64 },
    /// `offset + Σ ω_i² x_i²`.
    AnisotropicHarmonic { omega: [f64; 3], offset: f64 },
    /// Monotone cubic interpolation of `(radii, values)`, continued by
    /// `values[last]·(r/radii[last])^growth_exponent`.
    CustomRadial {
        radii: Vec<f64>,
        values: Vec<f64>,
        growth_exponent: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Harmonic { offset: f64 },
    Power { s: f64 },
    Anisotropic { omega2: [f64; 3], offset: f64 },
    Custom(CustomTable),
}

#[derive(Debug, Clone, PartialEq)]
struct CustomTable {
    profile: RadialProfile,
    slopes: Vec<f64>,
    growth: f64,
}

impl CustomTable {
    fn eval(&self, r: f64) -> f64 {
        let x = self.profile.nodes();
        let y = self.profile.values();
        let n = x.len();
        if r >= x[n - 1] {
            return y[n - 1] * (r / x[n - 1]).powf(self.growth);
        }
        if r <= x[0] {
            return y[0];
        }
        let i = x.partition_point(|&t| t <= r) - 1;
        let h = x[i + 1] - x[i];
        let t = (r - x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * y[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * y[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1]
    }

    fn derivative(&self, r: f64) -> f64 {
        let x = self.profile.nodes();
        let y = self.profile.values();
        let n = x.len();
        if r >= x[n - 1] {
            return self.growth * y[n - 1] / x[n - 1] * (r / x[n - 1]).powf(self.growth - 1.0);
        }
        if r <= x[0] {
            return 0.0;
        }
        let i = x.partition_point(|&t| t <= r) - 1;
        let h = x[i + 1] - x[i];
        let t = (r - x[i]) / h;
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * y[i]
            + (3.0 * t2 - 4.0 * t + 1.0) * h * self.slopes[i]
            + (-6.0 * t2 + 6.0 * t) * y[i + 1]
            + (3.0 * t2 - 2.0 * t) * h * self.slopes[i + 1])
            / h
    }
}

/// Fritsch–Carlson slopes for a monotone piecewise cubic Hermite interpolant.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    if n > 2 {
        d[0] = end(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    } else {
        d[0] = delta[0];
        d[1] = delta[0];
    }
    d
}

/// An evaluable confining trap.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    spec: PotentialSpec,
    kind: Kind,
}

/// Builds a potential from its configuration entry.
pub fn make_potential(spec: &PotentialSpec) -> Result<Potential, PotentialError> {
    let kind = match spec {
        PotentialSpec::Harmonic => Kind::Harmonic { offset: 0.0 },
        PotentialSpec::HarmonicPlusOne => Kind::Harmonic { offset: 1.0 },
        PotentialSpec::PowerPlusOne { s } => {
            if !(*s > 1.0) || !s.is_finite() {
                return Err(PotentialError::Config(format!(
                    "power_plus_one requires s > 1, got {s}"
                )));
            }
            Kind::Power { s: *s }
        }
        PotentialSpec::AnisotropicHarmonic { omega, offset } => {
            if omega.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
                return Err(PotentialError::Config(format!(
                    "anisotropic_harmonic frequencies must be positive, got {omega:?}"
                )));
            }
            if !(*offset >= 1.0) || !offset.is_finite() {
                return Err(PotentialError::Config(format!(
                    "anisotropic_harmonic offset must be >= 1, got {offset}"
                )));
            }
            Kind::Anisotropic {
                omega2: [omega[0] * omega[0], omega[1] * omega[1], omega[2] * omega[2]],
                offset: *offset,
            }
        }
        PotentialSpec::CustomRadial {
            radii,
            values,
            growth_exponent,
        } => {
            if !(*growth_exponent > 0.0) || !growth_exponent.is_finite() {
                return Err(PotentialError::Config(format!(
                    "custom_radial growth_exponent must be positive, got {growth_exponent}"
                )));
            }
            let profile = RadialProfile::new(radii.clone(), values.clone(), Tail::Zero)
                .map_err(|e| PotentialError::Config(format!("custom_radial table: {e}")))?;
            if radii[0] != 0.0 {
                return Err(PotentialError::Config(
                    "custom_radial table must start at r = 0".into(),
                ));
            }
            if values.iter().any(|v| *v < 1.0) {
                return Err(PotentialError::Config(
                    "custom_radial values must be >= 1".into(),
                ));
            }
            if values.windows(2).any(|w| w[1] < w[0]) {
                return Err(PotentialError::Config(
                    "custom_radial values must be nondecreasing".into(),
                ));
            }
            let slopes = pchip_slopes(radii, values);
            Kind::Custom(CustomTable {
                profile,
                slopes,
                growth: *growth_exponent,
            })
        }
    };
    Ok(Potential {
        spec: spec.clone(),
        kind,
    })
}

fn norm(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

impl Potential {
    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self.kind, Kind::Anisotropic { .. })
    }

    /// Built-ins carry analytic derivatives; tables do not.
    pub fn has_analytic_derivatives(&self) -> bool {
        !matches!(self.kind, Kind::Custom(_))
    }

    /// Exponent `s` in `V(x) ~ |x|^s` at infinity.
    pub fn growth_exponent(&self) -> f64 {
        match &self.kind {
            Kind::Harmonic { .. } | Kind::Anisotropic { .. } => 2.0,
            Kind::Power { s } => *s,
            Kind::Custom(t) => t.growth,
        }
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        match &self.kind {
            Kind::Anisotropic { omega2, offset } => {
                offset + omega2[0] * x[0] * x[0] + omega2[1] * x[1] * x[1] + omega2[2] * x[2] * x[2]
            }
            Kind::Harmonic { offset } => offset + x[0] * x[0] + x[1] * x[1] + x[2] * x[2],
            _ => self.eval_radial(norm(x)),
        }
    }

    /// Value at radius `r`; for the anisotropic kind this is the value on the
    /// first coordinate axis.
    pub fn eval_radial(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::Harmonic { offset } => offset + r * r,
            Kind::Power { s } => 1.0 + r.powf(*s),
            Kind::Anisotropic { omega2, offset } => offset + omega2[0] * r * r,
            Kind::Custom(t) => t.eval(r),
        }
    }

    /// `|∇V(x)|`.
    pub fn grad_norm(&self, x: [f64; 3]) -> f64 {
        let r = norm(x);
        match &self.kind {
            Kind::Harmonic { .. } => 2.0 * r,
            Kind::Power { s } => s * r.powf(s - 1.0),
            Kind::Anisotropic { omega2, .. } => {
                let g = [2.0 * omega2[0] * x[0], 2.0 * omega2[1] * x[1], 2.0 * omega2[2] * x[2]];
                norm(g)
            }
            Kind::Custom(t) => t.derivative(r).abs(),
        }
    }

    /// Minimum of V over space (attained at the origin for every kind).
    pub fn min_value(&self) -> f64 {
        self.eval([0.0; 3])
    }

    /// Largest radius with `V(r) ≤ level` for radial kinds; for the
    /// anisotropic kind, the largest semi-axis of the sub-level ellipsoid.
    /// Returns 0 when `level` is below the minimum.
    pub fn sublevel_radius(&self, level: f64) -> f64 {
        if level <= self.min_value() {
            return 0.0;
        }
        match &self.kind {
            Kind::Harmonic { offset } => (level - offset).sqrt(),
            Kind::Power { s } => (level - 1.0).powf(1.0 / s),
            Kind::Anisotropic { omega2, offset } => {
                let w = omega2.iter().cloned().fold(f64::INFINITY, f64::min);
                ((level - offset) / w).sqrt()
            }
            Kind::Custom(t) => {
                let last = t.profile.last_node();
                let vlast = *t.profile.values().last().unwrap();
                if level >= vlast {
                    return last * (level / vlast).powf(1.0 / t.growth);
                }
                // Bisection for sup{r : V(r) <= level}; V is nondecreasing.
                let (mut lo, mut hi) = (0.0, last);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if !(mid > lo && mid < hi) {
                        break;
                    }
                    if t.eval(mid) <= level {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }

    /// Half-widths of the axis-aligned box containing `{V ≤ level}`.
    pub fn sublevel_half_widths(&self, level: f64) -> [f64; 3] {
        match &self.kind {
            Kind::Anisotropic { omega2, offset } => {
                let d = (level - offset).max(0.0);
                [
                    (d / omega2[0]).sqrt(),
                    (d / omega2[1]).sqrt(),
                    (d / omega2[2]).sqrt(),
                ]
            }
            _ => [self.sublevel_radius(level); 3],
        }
    }

    /// Radii where the piecewise definition of V changes (table nodes).
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Custom(t) => t.profile.nodes().to_vec(),
            _ => Vec::new(),
        }
    }

    /// (ΔV, |∇ΔV|, Σ_jk |∂_jk V|²) from analytic formulas.
    fn h1_quantities(&self, x: [f64; 3]) -> Option<(f64, f64, f64)> {
        match &self.kind {
            Kind::Harmonic { .. } => Some((6.0, 0.0, 12.0)),
            Kind::Anisotropic { omega2, .. } => {
                let lap = 2.0 * (omega2[0] + omega2[1] + omega2[2]);
                let hs = 4.0 * omega2.iter().map(|w| w * w).sum::<f64>();
                Some((lap, 0.0, hs))
            }
            Kind::Power { s } => {
                let r = norm(x);
                let s = *s;
                // Radial Hessian eigenvalues: f'' once and f'/r twice.
                let f2 = s * (s - 1.0) * r.powf(s - 2.0);
                let f1r = s * r.powf(s - 2.0);
                let lap = s * (s + 1.0) * r.powf(s - 2.0);
                let grad_lap = (s * (s + 1.0) * (s - 2.0) * r.powf(s - 3.0)).abs();
                let grad_lap = if s == 2.0 { 0.0 } else { grad_lap };
                Some((lap, grad_lap, f2 * f2 + 2.0 * f1r * f1r))
            }
            Kind::Custom(_) => None,
        }
    }
}

/// ∫ f(V(x)) dx over `{V ≤ level}` for an integrand that vanishes, with a
/// kink, on the level set.
///
/// Radial traps reduce to a one-dimensional integral stopping exactly at the
/// sub-level radius; other traps use an iterated integral over the bounding
/// box, splitting the innermost integral where `V` crosses `level`.
pub fn sublevel_integral<F: Fn(f64) -> f64>(
    v: &Potential,
    level: f64,
    f: F,
    tol: Tolerance,
) -> Result<f64, NumericsError> {
    if level <= v.min_value() {
        return Ok(0.0);
    }
    if v.is_radial() {
        let r = v.sublevel_radius(level);
        if !r.is_finite() {
            return Err(NumericsError::InvalidArgument(format!(
                "sub-level set of level {level} is unbounded"
            )));
        }
        let breaks = v.breakpoints();
        return numerics::integrate_radial_with_breaks(|r| f(v.eval_radial(r)), r, &breaks, tol);
    }
    let half = v.sublevel_half_widths(level);
    let g = |p: [f64; 3]| {
        let vx = v.eval(p);
        if vx >= level {
            0.0
        } else {
            f(vx)
        }
    };
    let breaks = |x: f64, y: f64| {
        numerics::locate_sign_changes(|z| level - v.eval([x, y, z]), -half[2], half[2], 16)
    };
    numerics::integrate_box_nested(&g, half, &breaks, tol)
}

/// Smallest constants C₁, C₂, C₃ with `|ΔV| ≤ C₁V²`, `|∇ΔV| ≤ C₂V`,
/// `Σ|∂_jk V|² ≤ C₃V²` on the sampled ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H1Report {
    pub radius: f64,
    pub samples: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c1_finite: bool,
    pub c2_finite: bool,
    pub c3_finite: bool,
    pub pass: bool,
    pub min_sampled_v: f64,
}

/// Radical inverse of `i` in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let inv = 1.0 / b as f64;
    while i > 0 {
        f *= inv;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// First `count` points of the 3D Halton sequence mapped into the ball of
/// the given radius (cube points outside the ball are skipped).
pub fn halton_ball(radius: f64, count: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let p = [
            radius * (2.0 * radical_inverse(i, 2) - 1.0),
            radius * (2.0 * radical_inverse(i, 3) - 1.0),
            radius * (2.0 * radical_inverse(i, 5) - 1.0),
        ];
        if norm(p) <= radius {
            out.push(p);
        }
        i += 1;
    }
    out
}

/// Golden-section maximisation of a unimodal `g` on `[a, b]`.
fn golden_max<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..120 {
        if (b - a).abs() <= 1e-13 * (1.0 + b.abs()) {
            break;
        }
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d);
        }
    }
    gc.max(gd).max(g(0.5 * (a + b)))
}

/// Sampled check of the regularity hypotheses on the ball of `radius`.
///
/// Samples are a deterministic Halton set plus the origin. For radial
/// potentials the three ratios depend on `|x|` only; each is additionally
/// maximised along the radius by a grid scan with golden-section polish, so
/// the reported constants are nondecreasing in `radius`.
pub fn h1_diagnostic(v: &Potential, radius: f64, samples: usize) -> Result<H1Report, PotentialError> {
    if !v.has_analytic_derivatives() {
        return Err(PotentialError::UnsupportedDiagnostic(
            "custom_radial tables carry no analytic derivatives (regularity declared, not verified)"
                .into(),
        ));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(PotentialError::Config(format!("radius must be positive, got {radius}")));
    }
    let mut points = vec![[0.0; 3]];
    points.extend(halton_ball(radius, samples.max(1)));
    let ratios = |x: [f64; 3]| {
        let val = v.eval(x);
        let (lap, glap, hs) = v.h1_quantities(x).unwrap();
        (lap.abs() / (val * val), glap / val, hs / (val * val))
    };
    let (mut c1, mut c2, mut c3) = (0.0f64, 0.0f64, 0.0f64);
    let mut vmin = f64::INFINITY;
    for &x in &points {
        let (a, b, c) = ratios(x);
        c1 = c1.max(a);
        c2 = c2.max(b);
        c3 = c3.max(c);
        vmin = vmin.min(v.eval(x));
    }
    if v.is_radial() {
        let n = samples.max(64);
        let along = |k: usize| move |r: f64| {
            let q = ratios([r, 0.0, 0.0]);
            match k {
                0 => q.0,
                1 => q.1,
                _ => q.2,
            }
        };
        for k in 0..3 {
            let g = along(k);
            let grid = numerics::linspace(0.0, radius, n + 1);
            let vals: Vec<f64> = grid.iter().map(|&r| g(r)).collect();
            let mut best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for i in 1..n {
                if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] && vals[i].is_finite() {
                    best = best.max(golden_max(&g, grid[i - 1], grid[i + 1]));
                }
            }
            match k {
                0 => c1 = c1.max(best),
                1 => c2 = c2.max(best),
                _ => c3 = c3.max(best),
            }
        }
    }
    let (f1, f2, f3) = (c1.is_finite(), c2.is_finite(), c3.is_finite());
    Ok(H1Report {
        radius,
        samples: points.len(),
        c1,
        c2,
        c3,
        c1_finite: f1,
        c2_finite: f2,
        c3_finite: f3,
        pass: f1 && f2 && f3,
        min_sampled_v: vmin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pot(spec: PotentialSpec) -> Potential {
        make_potential(&spec).unwrap()
    }

    #[test]
    fn harmonic_plus_one_at_origin() {
        let v = pot(PotentialSpec::HarmonicPlusOne);
        assert_eq!(v.eval([0.0; 3]), 1.0);
        assert_eq!(v.eval([1.0, 1.0, 1.0]), 4.0);
    }

    #[test]
    fn quartic_at_unit_radius() {
        let v = pot(PotentialSpec::PowerPlusOne { s: 4.0 });
        assert!((v.eval([0.0, 1.0, 0.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_exponent() {
        assert!(matches!(
            make_potential(&PotentialSpec::PowerPlusOne { s: 0.5 }),
            Err(PotentialError::Config(_))
        ));
        assert!(make_potential(&PotentialSpec::PowerPlusOne { s: 1.0 }).is_err());
    }

    #[test]
    fn unknown_kind_is_a_parse_error() {
        let r: Result<PotentialSpec, _> = serde_json::from_str(r#"{"kind":"coulomb"}"#);
        assert!(r.is_err());
        let ok: PotentialSpec = serde_json::from_str(r#"{"kind":"power_plus_one","s":3}"#).unwrap();
        assert_eq!(ok, PotentialSpec::PowerPlusOne { s: 3.0 });
    }

    #[test]
    fn h1_harmonic_constants() {
        let v = pot(PotentialSpec::HarmonicPlusOne);
        let rep = h1_diagnostic(&v, 10.0, 500).unwrap();
        assert_eq!(rep.c1, 6.0);
        assert_eq!(rep.c2, 0.0);
        assert_eq!(rep.c3, 12.0);
        assert!(rep.pass);
    }

    #[test]
    fn h1_custom_is_unsupported() {
        let radii = numerics::linspace(0.0, 3.0, 20);
        let values = radii.iter().map(|r| 1.0 + r * r).collect();
        let v = pot(PotentialSpec::CustomRadial {
            radii,
            values,
            growth_exponent: 2.0,
        });
        assert!(matches!(
            h1_diagnostic(&v, 1.0, 10),
            Err(PotentialError::UnsupportedDiagnostic(_))
        ));
    }

    #[test]
    fn h1_quartic_interior_maximum() {
        // |ΔV|/V² = 20r²/(1+r⁴)² peaks at r⁴ = 1/3.
        let v = pot(PotentialSpec::PowerPlusOne { s: 4.0 });
        let rep = h1_diagnostic(&v, 3.0, 200).unwrap();
        let r2 = (1.0f64 / 3.0).sqrt();
        let exact = 20.0 * r2 / (1.0 + r2 * r2).powi(2);
        assert!((rep.c1 - exact).abs() < 1e-12 * exact, "{} vs {exact}", rep.c1);
    }

    #[test]
    fn h1_fails_for_subquadratic_power() {
        let v = pot(PotentialSpec::PowerPlusOne { s: 1.5 });
        let rep = h1_diagnostic(&v, 2.0, 50).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn power_growth_ratio() {
        for s in [1.5, 2.0, 3.0, 4.0, 6.5] {
            let v = pot(PotentialSpec::PowerPlusOne { s });
            let x = [1e3, 0.0, 0.0];
            assert!((v.eval(x) / 1e3f64.powf(s) - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn custom_table_interpolates_and_extends() {
        let radii = numerics::linspace(0.0, 2.0, 21);
        let values: Vec<f64> = radii.iter().map(|r| 1.0 + r * r).collect();
        let v = pot(PotentialSpec::CustomRadial {
            radii,
            values,
            growth_exponent: 2.0,
        });
        assert!((v.eval_radial(1.05) - (1.0 + 1.05 * 1.05)).abs() < 1e-3);
        assert!((v.eval_radial(4.0) - 5.0 * 4.0).abs() < 1e-12);
        let r = v.sublevel_radius(3.0);
        assert!((v.eval_radial(r) - 3.0).abs() < 1e-10);
    }

    #[test]
    fn sublevel_radius_inverts_builtins() {
        for spec in [
            PotentialSpec::Harmonic,
            PotentialSpec::HarmonicPlusOne,
            PotentialSpec::PowerPlusOne { s: 3.0 },
        ] {
            let v = pot(spec);
            let r = v.sublevel_radius(5.0);
            assert!((v.eval_radial(r) - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn halton_points_lie_in_ball() {
        let pts = halton_ball(2.0, 300);
        assert_eq!(pts.len(), 300);
        assert!(pts.iter().all(|p| norm(*p) <= 2.0));
        assert_eq!(pts, halton_ball(2.0, 300));
    }

    proptest! {
        #[test]
        fn builtins_bounded_below_by_one(
            s in 1.01f64..8.0,
            x in -50.0f64..50.0, y in -50.0f64..50.0, z in -50.0f64..50.0,
        ) {
            let p = [x, y, z];
            prop_assert!(pot(PotentialSpec::HarmonicPlusOne).eval(p) >= 1.0);
            let power = pot(PotentialSpec::PowerPlusOne { s });
            prop_assert!(power.eval(p) >= 1.0);
            let a = pot(PotentialSpec::AnisotropicHarmonic { omega: [1.0, 2.0, 0.5], offset: 1.0 });
            prop_assert!(a.eval(p) >= 1.0);
        }

        #[test]
        fn h1_constants_monotone_in_radius(s in 2.0f64..6.0, r1 in 0.1f64..4.0, dr in 0.0f64..4.0) {
            let v = pot(PotentialSpec::PowerPlusOne { s });
            let a = h1_diagnostic(&v, r1, 64).unwrap();
            let b = h1_diagnostic(&v, r1 + dr, 64).unwrap();
            let ok = |lo: f64, hi: f64| hi >= lo || (hi - lo).abs() <= 1e-12 * lo.abs();
            prop_assert!(ok(a.c1, b.c1));
            prop_assert!(ok(a.c2, b.c2));
            prop_assert!(ok(a.c3, b.c3));
        }
    }
}
