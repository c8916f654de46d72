//! Acceptance checks run by `verify-all`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use fermitrap_core::asymptotics::{self, EpsilonRule, ScalingContext};
use fermitrap_core::numerics::{self, Tolerance};
use fermitrap_core::potentials::{make_potential, Potential, PotentialSpec};
use fermitrap_core::scattering::{self, InteractionSpec};
use fermitrap_core::semiclassics;
use fermitrap_core::spectra::{self, HbarSplit, Trap1d, WeylTrap};
use fermitrap_core::thomas_fermi::{self, TFSolution};
use num_rational::Ratio;

use crate::commands;
use crate::config::RunConfig;
use crate::output::{Artifact, Header};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
    pub threshold: String,
    /// Wall time, kept out of emitted files.
    pub elapsed: Duration,
}

fn outcome(id: u32, name: &'static str, passed: bool, measured: String, threshold: &str, t0: Instant) -> CheckOutcome {
    CheckOutcome {
        id,
        name,
        passed,
        measured,
        threshold: threshold.to_string(),
        elapsed: t0.elapsed(),
    }
}

fn failed(id: u32, name: &'static str, err: impl std::fmt::Display, t0: Instant) -> CheckOutcome {
    outcome(id, name, false, format!("error: {err}"), "", t0)
}

fn tol() -> Tolerance {
    Tolerance::new(1e-13, 1e-11, 4000).expect("valid")
}

fn potential(spec: PotentialSpec) -> Potential {
    make_potential(&spec).expect("built-in potential")
}

fn harmonic_tf() -> Result<TFSolution, String> {
    thomas_fermi::tf_solve(&potential(PotentialSpec::Harmonic), tol()).map_err(|e| e.to_string())
}

fn c1_chemical_potential() -> CheckOutcome {
    let name = "TF chemical potential of |x|^2";
    let t0 = Instant::now();
    match harmonic_tf() {
        Ok(sol) => {
            let err = (sol.lambda_tf - 24f64.powf(1.0 / 3.0)).abs();
            let fast = t0.elapsed() < Duration::from_secs(1);
            outcome(1, name, err <= 1e-6 && fast, format!("|dlambda| = {err:.3e}, under 1 s: {fast}"), "1e-6, 1 s", t0)
        }
        Err(e) => failed(1, name, e, t0),
    }
}

fn c2_energy() -> CheckOutcome {
    let name = "TF energy and interaction integral";
    let t0 = Instant::now();
    match harmonic_tf() {
        Ok(sol) => {
            let de = (sol.e_tf - 0.75 * 24f64.powf(1.0 / 3.0)).abs();
            let di = (sol.interaction_integral - 64.0 / 2835.0 * 24f64.powf(1.5) / PI.powi(3)).abs();
            outcome(
                2,
                name,
                de <= 1e-5 && di <= 1e-4,
                format!("|dE| = {de:.3e}, |d int rho^2| = {di:.3e}"),
                "1e-5, 1e-4",
                t0,
            )
        }
        Err(e) => failed(2, name, e, t0),
    }
}

fn c3_lagrange() -> CheckOutcome {
    let name = "Lagrange residual on the support";
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for spec in [PotentialSpec::Harmonic, PotentialSpec::HarmonicPlusOne] {
        match thomas_fermi::tf_solve(&potential(spec), tol()) {
            Ok(sol) => worst = worst.max(sol.lagrange_residual / sol.lambda_tf),
            Err(e) => return failed(3, name, e, t0),
        }
    }
    outcome(3, name, worst <= 1e-8, format!("max residual/lambda = {worst:.3e}"), "1e-8", t0)
}

fn a_of(spec: &InteractionSpec) -> Result<f64, String> {
    scattering::zero_energy_solve(spec, scattering::default_r_max(spec), tol())
        .map(|s| s.a)
        .map_err(|e| e.to_string())
}

fn c4_barrier() -> CheckOutcome {
    let name = "square-barrier scattering length";
    let t0 = Instant::now();
    let cases = [(2.0, 1.0 - 1f64.tanh()), (200.0, 1.0 - 10f64.tanh() / 10.0)];
    let mut errs = Vec::new();
    for (amp, exact) in cases {
        match a_of(&InteractionSpec::step(amp, 1.0)) {
            Ok(a) => errs.push((a - exact).abs()),
            Err(e) => return failed(4, name, e, t0),
        }
    }
    let pass = errs.iter().all(|e| *e <= 1e-6);
    outcome(4, name, pass, format!("errors A=2: {:.3e}, A=200: {:.3e}", errs[0], errs[1]), "1e-6", t0)
}

fn c5_hardcore() -> CheckOutcome {
    let name = "hard-core limit of the unit barrier";
    let t0 = Instant::now();
    let amps: Vec<f64> = (0..12).map(|k| 10f64.powf(4.0 * k as f64 / 11.0)).collect();
    match scattering::hardcore_limit(&InteractionSpec::step(1.0, 1.0), &amps, tol()) {
        Ok(seq) => {
            let mono = seq.windows(2).all(|w| w[1].1 >= w[0].1);
            let bounded = seq.iter().all(|&(_, a)| a <= 1.0);
            let last = seq[seq.len() - 1].1;
            let fast = t0.elapsed() < Duration::from_secs(5);
            outcome(
                5,
                name,
                mono && bounded && last >= 0.985 && fast,
                format!("a(1e4) = {last:.6}, nondecreasing: {mono}, <= R: {bounded}, under 5 s: {fast}"),
                ">= 0.985, 5 s",
                t0,
            )
        }
        Err(e) => failed(5, name, e, t0),
    }
}

fn c6_dilation() -> CheckOutcome {
    let name = "dilation identity for the scaled interaction";
    let t0 = Instant::now();
    let w = InteractionSpec::step(2.0, 1.0);
    let mut worst: f64 = 0.0;
    for n in [100u64, 10_000] {
        for beta in [0.35, 0.45] {
            match scattering::scaled_identity_check(&w, n, beta, tol()) {
                Ok(r) => worst = worst.max(r.rel_err),
                Err(e) => return failed(6, name, e, t0),
            }
        }
    }
    outcome(6, name, worst <= 1e-8, format!("max relative error = {worst:.3e}"), "1e-8", t0)
}

fn c7_weyl() -> CheckOutcome {
    let name = "Weyl scan of the 3d oscillator";
    let t0 = Instant::now();
    let trap = WeylTrap::Harmonic3d { offset: 0.0 };
    match spectra::weyl_error_scan(&trap, &[1000, 10_000, 100_000, 1_000_000], commands::default_weyl_lambda()) {
        Ok(s) => {
            let env = 8.0 / 9.0 + 0.05;
            let fast = t0.elapsed() < Duration::from_secs(10);
            let pass = s.n_exponent <= env && s.e_exponent <= env && s.per_particle_decreasing && fast;
            let per_n: Vec<String> = s.rows.iter().map(|r| format!("{:.3e}", r.n_err / r.n as f64)).collect();
            let per_e: Vec<String> = s.rows.iter().map(|r| format!("{:.3e}", r.e_err / r.n as f64)).collect();
            outcome(
                7,
                name,
                pass,
                format!(
                    "exponents n: {:.4}, e: {:.4}; n_err/N [{}]; e_err/N [{}]; under 10 s: {fast}",
                    s.n_exponent,
                    s.e_exponent,
                    per_n.join(" "),
                    per_e.join(" ")
                ),
                "<= 8/9 + 0.05, error/N strictly decreasing, 10 s",
                t0,
            )
        }
        Err(e) => failed(7, name, e, t0),
    }
}

fn c8_legendre() -> CheckOutcome {
    let name = "Legendre relation of the phase-space counts";
    let t0 = Instant::now();
    let grid = numerics::linspace(0.5, 5.0, 50);
    match semiclassics::legendre_check(&potential(PotentialSpec::Harmonic), &grid) {
        Ok(rows) => {
            let worst = rows.iter().map(|r| r.relative_residual).fold(0.0, f64::max);
            outcome(8, name, worst <= 1e-3, format!("max relative residual = {worst:.3e}"), "1e-3", t0)
        }
        Err(e) => failed(8, name, e, t0),
    }
}

/// Least-squares decay exponent of positive gaps; +∞ when every gap is 0.
pub fn decay_exponent(p_fs: &[f64], gaps: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = p_fs
        .iter()
        .zip(gaps)
        .filter(|(_, g)| **g > 0.0)
        .map(|(p, g)| (p.ln(), g.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    -numerics::least_squares_line(&xs, &ys).0
}

fn c9_cutoff() -> CheckOutcome {
    let name = "momentum-cutoff TF energy gap";
    let t0 = Instant::now();
    let v = potential(PotentialSpec::Harmonic);
    let sol = match thomas_fermi::tf_solve(&v, tol()) {
        Ok(s) => s,
        Err(e) => return failed(9, name, e, t0),
    };
    let p_fs = [4.0, 8.0, 16.0, 32.0];
    let mut gaps = Vec::new();
    for &p in &p_fs {
        match thomas_fermi::cutoff_tf_solve(&v, p, tol()) {
            Ok(c) => gaps.push(sol.e_tf - c.e_tf_pf),
            Err(e) => return failed(9, name, e, t0),
        }
    }
    let nonneg = gaps.iter().all(|g| *g >= 0.0);
    let k = decay_exponent(&p_fs, &gaps);
    let shown = if k.is_finite() {
        format!("{k:.4}")
    } else {
        "unbounded (gap vanishes identically)".to_string()
    };
    let g: Vec<String> = gaps.iter().map(|x| format!("{x:.3e}")).collect();
    outcome(9, name, nonneg && k >= 1.8, format!("gaps [{}]; decay exponent {shown}", g.join(" ")), ">= 0, exponent >= 1.8", t0)
}

fn c10_two_spin() -> CheckOutcome {
    let name = "two-spin perturbation at small coupling";
    let t0 = Instant::now();
    let v = potential(PotentialSpec::Harmonic);
    let sol = match thomas_fermi::tf_solve(&v, tol()) {
        Ok(s) => s,
        Err(e) => return failed(10, name, e, t0),
    };
    let target = 0.25 * sol.interaction_integral;
    let t = Tolerance::new(1e-12, 1e-10, 4000).expect("valid");
    let mut defects = Vec::new();
    let mut gap: f64 = 0.0;
    for g in [0.2, 0.1, 0.05] {
        match thomas_fermi::two_spin_minimize(&v, g, t) {
            Ok(st) => {
                defects.push(((st.energy - sol.e_tf) / g - target).abs());
                gap = gap.max(st.spin_gap);
            }
            Err(e) => return failed(10, name, e, t0),
        }
    }
    let decreasing = defects.windows(2).all(|w| w[1] < w[0]);
    let rel = defects[2] / target;
    outcome(
        10,
        name,
        decreasing && rel <= 0.05 && gap <= 1e-6,
        format!(
            "defects [{:.3e} {:.3e} {:.3e}], relative at g=0.05: {rel:.3e}, spin gap {gap:.3e}",
            defects[0], defects[1], defects[2]
        ),
        "decreasing, 5%, 1e-6",
        t0,
    )
}

fn c11_dyson() -> CheckOutcome {
    let name = "Dyson-replacement ingredients";
    let t0 = Instant::now();
    let p_f = 2.0;
    let s = 1.0 / (2.0 * p_f);
    match scattering::dyson_parts(0.1, 0.5, s, p_f) {
        Ok(kit) => {
            let grid = numerics::linspace(0.0, 4.0 / s, 10_000);
            let bad = kit.gamma_violations(&grid).len();
            let du = (kit.u_integral - 1.0).abs();
            outcome(
                11,
                name,
                du <= 1e-10 && bad == 0,
                format!("|int U_R - 1| = {du:.3e}, violations {bad}/10000"),
                "1e-10, 0 violations",
                t0,
            )
        }
        Err(e) => failed(11, name, e, t0),
    }
}

fn c12_windows() -> CheckOutcome {
    let name = "beta windows under exact arithmetic";
    let t0 = Instant::now();
    let n = 1_000_000;
    let eps = Ratio::new(1, 1_000_000);
    let at = asymptotics::beta_l_window(Ratio::new(34, 81), n);
    let below = asymptotics::beta_l_window(Ratio::new(34, 81) - eps, n);
    let half = asymptotics::beta_l_window(Ratio::new(1, 2), n);
    let below_half = asymptotics::beta_l_window(Ratio::new(1, 2) - eps, n);
    let pass = !at.feasible && below.feasible && !half.lower_bound_regime && below_half.lower_bound_regime;
    outcome(
        12,
        name,
        pass,
        format!(
            "feasible at 34/81: {}, just below: {}; lower flag at 1/2: {}, just below: {}",
            at.feasible, below.feasible, half.lower_bound_regime, below_half.lower_bound_regime
        ),
        "flip at 34/81 and 1/2",
        t0,
    )
}

fn c13_boxes() -> CheckOutcome {
    let name = "box estimator against the continuum prediction";
    let t0 = Instant::now();
    let run = || -> Result<(f64, Vec<(f64, f64)>), String> {
        let sol = harmonic_tf()?;
        let ctx = ScalingContext::new(1_000_000, 0.4, InteractionSpec::step(2.0, 1.0), tol()).map_err(|e| e.to_string())?;
        let w = asymptotics::beta_l_window(Ratio::new(2, 5), 1_000_000);
        let l = w.l.ok_or("window infeasible")?;
        let est = asymptotics::box_estimate(&sol, &ctx, l).map_err(|e| e.to_string())?;
        let sweep = asymptotics::box_refinement_sweep(&sol, &ctx, &[1_000_000, 100_000_000, 10_000_000_000])
            .map_err(|e| e.to_string())?;
        Ok((est.ratio, sweep.iter().map(|e| (e.defect_5_3(), e.defect_2())).collect()))
    };
    match run() {
        Ok((ratio, defects)) => {
            let refine = defects.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1);
            let d: Vec<String> = defects.iter().map(|(a, b)| format!("({a:.3e}, {b:.3e})")).collect();
            outcome(
                13,
                name,
                (0.9..=1.3).contains(&ratio) && refine,
                format!("ratio {ratio:.4}; defects (rho^5/3, rho^2) along l(N): {}", d.join(" ")),
                "[0.9, 1.3], decreasing",
                t0,
            )
        }
        Err(e) => failed(13, name, e, t0),
    }
}

fn c14_budget() -> CheckOutcome {
    let name = "error budget ratio along N";
    let t0 = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for beta in [0.40, 0.45, 0.49] {
        let mut r = Vec::new();
        for n in [10_000u64, 1_000_000, 100_000_000] {
            match asymptotics::error_budget(n, beta, EpsilonRule::Default) {
                Ok(b) => r.push(b.ratio),
                Err(e) => return failed(14, name, e, t0),
            }
        }
        pass &= r.windows(2).all(|w| w[1] < w[0]);
        parts.push(format!("beta {beta}: [{:.3e} {:.3e} {:.3e}]", r[0], r[1], r[2]));
    }
    outcome(14, name, pass, parts.join("; "), "strictly decreasing", t0)
}

fn c15_husimi() -> CheckOutcome {
    let name = "coherent-state identities in 1d";
    let t0 = Instant::now();
    let trap = Trap1d::harmonic();
    let mut reports = Vec::new();
    for hbar in [0.05, 0.025] {
        let r = commands::coherent_catalog(&trap, hbar, 1.2).map_err(|e| e.to_string()).and_then(|cat| {
            spectra::coherent_identity_check_1d(&cat, 10, HbarSplit::default_for(hbar), 0.5).map_err(|e| e.to_string())
        });
        match r {
            Ok(r) => reports.push(r),
            Err(e) => return failed(15, name, e, t0),
        }
    }
    let res = reports.iter().map(|r| r.resolution_residual).fold(0.0, f64::max);
    let kin = reports.iter().map(|r| r.kinetic_identity_residual).fold(0.0, f64::max);
    let factor = reports[0].potential_identity_residual / reports[1].potential_identity_residual;
    let bounded = reports.iter().all(|r| r.m_min >= -1e-12 && r.m_max <= 1.0 + 1e-12);
    outcome(
        15,
        name,
        res <= 1e-6 && kin <= 1e-8 && factor >= 1.3 && bounded,
        format!("resolution {res:.3e}, kinetic {kin:.3e}, potential factor {factor:.4}, m in [0,1]: {bounded}"),
        "1e-6, 1e-8, >= 1.3",
        t0,
    )
}

fn c16_free_density() -> CheckOutcome {
    let name = "free ground-state density against TF";
    let t0 = Instant::now();
    match spectra::free_density_sweep(&[100, 1000, 10_000]) {
        Ok(rows) => {
            let dec = rows.windows(2).all(|w| w[1].l1_distance < w[0].l1_distance);
            let mass = rows.iter().all(|r| (r.mass - r.m as f64).abs() <= 1e-6 * r.m as f64);
            let last = rows[2].l1_distance;
            let d: Vec<String> = rows.iter().map(|r| format!("{:.4e}", r.l1_distance)).collect();
            outcome(
                16,
                name,
                dec && mass && last <= 0.05,
                format!("L1 [{}], masses exact: {mass}", d.join(" ")),
                "decreasing, <= 0.05, 1e-6 M",
                t0,
            )
        }
        Err(e) => failed(16, name, e, t0),
    }
}

/// Renders a fixed set of command outputs twice and compares the bytes.
fn c17_determinism() -> CheckOutcome {
    let name = "byte-identical reruns";
    let t0 = Instant::now();
    let render = || -> Result<Vec<String>, String> {
        let cfg = RunConfig::from_toml(
            "[potential]\nkind = \"harmonic_plus_one\"\n[interaction]\nshape = \"step\"\namplitude = 2.0\n[sweep]\ng = [0.1]\n",
        )
        .map_err(|e| e.to_string())?;
        let mut arts: Vec<Artifact> = Vec::new();
        arts.extend(commands::tf(&cfg).map_err(|e| e.to_string())?);
        arts.extend(commands::scatter(&cfg).map_err(|e| e.to_string())?);
        arts.extend(commands::semiclass(&cfg).map_err(|e| e.to_string())?);
        let h = Header::new("determinism", &cfg);
        arts.iter().map(|a| a.render_csv(&h).map_err(|e| e.to_string())).collect()
    };
    match (render(), render()) {
        (Ok(a), Ok(b)) => outcome(17, name, a == b, format!("{} files compared, identical: {}", a.len(), a == b), "identical", t0),
        (Err(e), _) | (_, Err(e)) => failed(17, name, e, t0),
    }
}

pub fn run_all() -> Vec<CheckOutcome> {
    let checks: Vec<fn() -> CheckOutcome> = vec![
        c1_chemical_potential,
        c2_energy,
        c3_lagrange,
        c4_barrier,
        c5_hardcore,
        c6_dilation,
        c7_weyl,
        c8_legendre,
        c9_cutoff,
        c10_two_spin,
        c11_dyson,
        c12_windows,
        c13_boxes,
        c14_budget,
        c15_husimi,
        c16_free_density,
        c17_determinism,
    ];
    // Sequential on purpose: the runtime criteria are measured per check.
    checks.into_iter().map(|c| c()).collect()
}

pub fn artifact(outcomes: &[CheckOutcome]) -> Artifact {
    let mut a = Artifact::new("acceptance", &["acceptance"], &["id", "criterion", "status", "measured", "threshold"]);
    for o in outcomes {
        a.push(vec![
            (o.id as u64).into(),
            o.name.into(),
            if o.passed { "PASS" } else { "FAIL" }.into(),
            o.measured.clone().into(),
            o.threshold.clone().into(),
        ]);
    }
    a
}
