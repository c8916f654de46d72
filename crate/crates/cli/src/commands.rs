//! One function per subcommand; each returns the tables it wants written.

use fermitrap_core::asymptotics::{self, EpsilonRule, ScalingContext};
use fermitrap_core::numerics::{self, Tolerance};
use fermitrap_core::scattering;
use fermitrap_core::semiclassics;
use fermitrap_core::spectra::{self, HbarSplit, SpectralCatalog, Trap1d, WeylTrap};
use fermitrap_core::thomas_fermi::{self, CutoffRegime};

use crate::config::RunConfig;
use crate::output::{Artifact, Cell};
use crate::CliError;

fn num<E: std::fmt::Display>(op: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Numerical(format!("{op}: {e}"))
}

fn maybe(x: f64) -> Cell {
    if x.is_finite() {
        Cell::Float(x)
    } else {
        Cell::Text("undefined".into())
    }
}

pub fn tf(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let v = cfg.potential()?;
    let tol = cfg.tolerance;
    let sol = thomas_fermi::tf_solve(&v, tol).map_err(num("tf_solve"))?;
    let mut summary = Artifact::new(
        "tf_solution",
        &["tf.normalization", "tf.energy", "tf.lagrange"],
        &[
            "lambda_tf",
            "e_tf",
            "int_rho_5_3",
            "int_v_rho",
            "int_rho_2",
            "mass",
            "lagrange_residual",
            "support_radius",
            "exterior_consistent",
        ],
    );
    summary.push(vec![
        sol.lambda_tf.into(),
        sol.e_tf.into(),
        sol.kinetic_integral.into(),
        sol.potential_integral.into(),
        sol.interaction_integral.into(),
        sol.mass.into(),
        sol.lagrange_residual.into(),
        sol.support_radius.into(),
        sol.exterior_consistent.into(),
    ]);
    let mut out = vec![summary];
    if v.is_radial() {
        let mut prof = Artifact::new("tf_profile", &["tf.density"], &["r", "rho", "v", "residual"]);
        for row in sol.profile_rows() {
            prof.push(row.iter().map(|&x| Cell::Float(x)).collect());
        }
        out.push(prof);
    }
    if let Some(gs) = &cfg.sweep.g {
        let mut t = Artifact::new(
            "tf_two_spin",
            &["tf.two_spin"],
            &["g", "energy", "mu", "mass", "iterations", "spin_gap", "energy_shift_over_g", "quarter_int_rho_2"],
        );
        for &g in gs {
            let st = thomas_fermi::two_spin_minimize(&v, g, tol).map_err(num("two_spin_minimize"))?;
            let shift = if g == 0.0 { 0.0 } else { (st.energy - sol.e_tf) / g };
            t.push(vec![
                g.into(),
                st.energy.into(),
                st.mu.into(),
                st.mass.into(),
                st.iterations.into(),
                st.spin_gap.into(),
                shift.into(),
                (0.25 * sol.interaction_integral).into(),
            ]);
        }
        out.push(t);
    }
    if let Some(pfs) = &cfg.sweep.p_f {
        let mut t = Artifact::new(
            "tf_cutoff",
            &["tf.cutoff"],
            &["p_f", "e_tf_pf", "gap", "overflow_mass", "mu", "rho_star", "regime"],
        );
        for &p in pfs {
            let c = thomas_fermi::cutoff_tf_solve(&v, p, tol).map_err(num("cutoff_tf_solve"))?;
            t.push(vec![
                p.into(),
                c.e_tf_pf.into(),
                (sol.e_tf - c.e_tf_pf).into(),
                c.overflow_mass.into(),
                c.mu.into(),
                c.rho_star.into(),
                match c.regime {
                    CutoffRegime::Inactive => "inactive",
                    CutoffRegime::Active => "active",
                }
                .into(),
            ]);
        }
        out.push(t);
    }
    Ok(out)
}

pub fn scatter(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let w = cfg.interaction()?;
    let tol = cfg.tolerance;
    let amps = cfg.sweep.amplitude.clone().unwrap_or_else(|| vec![w.amplitude]);
    let mut t = Artifact::new(
        "scattering",
        &["scattering.zero_energy", "scattering.energy_identity"],
        &["amplitude", "a", "range", "fit_residual", "richardson_error", "energy", "energy_identity_rel"],
    );
    for &amp in &amps {
        let spec = w.with_amplitude(amp);
        let s = scattering::zero_energy_solve(&spec, scattering::default_r_max(&spec), tol).map_err(num("zero_energy_solve"))?;
        let e = s.scattering_energy();
        let four_pi_a = 4.0 * std::f64::consts::PI * s.a;
        let rel = if four_pi_a == 0.0 { e.abs() } else { (e - four_pi_a).abs() / four_pi_a };
        t.push(vec![
            amp.into(),
            s.a.into(),
            s.range.into(),
            s.fit_residual.into(),
            s.richardson_error.into(),
            e.into(),
            rel.into(),
        ]);
    }
    let mut out = vec![t];
    let base = scattering::zero_energy_solve(&w, scattering::default_r_max(&w), tol).map_err(num("zero_energy_solve"))?;
    let mut prof = Artifact::new("scattering_profile", &["scattering.zero_energy"], &["r", "u", "f", "v"]);
    for row in base.rows() {
        prof.push(row.iter().map(|&x| Cell::Float(x)).collect());
    }
    out.push(prof);
    if let (Some(ns), Some(betas)) = (&cfg.sweep.n, &cfg.sweep.beta) {
        let mut d = Artifact::new("dilation", &["scattering.dilation"], &["n", "beta", "a_scaled", "n_pow_minus_beta_a", "rel_err"]);
        for &beta in betas {
            for &n in ns {
                let r = scattering::scaled_identity_check(&w, n, beta, tol).map_err(num("scaled_identity_check"))?;
                d.push(vec![n.into(), beta.into(), r.lhs.into(), r.rhs.into(), r.rel_err.into()]);
            }
        }
        out.push(d);
    }
    Ok(out)
}

pub fn semiclass(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let v = cfg.potential()?;
    let vmin = v.min_value();
    let lambdas = cfg
        .sweep
        .lambda
        .clone()
        .unwrap_or_else(|| numerics::linspace(vmin + 0.1, vmin + 4.0, 40));
    let budgets = semiclassics::sweep(&v, &lambdas).map_err(num("phase_space_counts"))?;
    let mut t = Artifact::new("semiclassics", &["semiclassics.phase_space"], &["lambda", "n_cl", "e_cl", "e_tilde"]);
    for b in &budgets {
        t.push(vec![b.lambda.into(), b.n_cl.into(), b.e_cl.into(), b.e_tilde.into()]);
    }
    let rows = semiclassics::legendre_check(&v, &lambdas).map_err(num("legendre_check"))?;
    let mut l = Artifact::new(
        "legendre",
        &["semiclassics.legendre"],
        &["lambda", "de_dlambda", "lambda_dn_dlambda", "relative_residual"],
    );
    for r in &rows {
        l.push(vec![r.lambda.into(), r.de_dlambda.into(), r.lambda_dn_dlambda.into(), r.relative_residual.into()]);
    }
    let mut out = vec![t, l];
    if lambdas.len() >= 5 {
        let h2 = semiclassics::h2_probe(&v, &lambdas).map_err(num("h2_probe"))?;
        let mut h = Artifact::new("h2_probe", &["semiclassics.h2_probe"], &["lambda", "n_cl", "dn_dlambda"]);
        for i in 0..h2.lambdas.len() {
            h.push(vec![h2.lambdas[i].into(), h2.n_cl[i].into(), h2.derivative[i].into()]);
        }
        let mut s = Artifact::new(
            "h2_summary",
            &["semiclassics.h2_probe"],
            &["smoothness_score", "threshold", "suspected_non_differentiable", "points_above_min"],
        );
        s.push(vec![
            h2.smoothness_score.into(),
            semiclassics::H2_FLAG_THRESHOLD.into(),
            h2.suspected_non_differentiable.into(),
            h2.points_above_min.into(),
        ]);
        out.push(h);
        out.push(s);
    }
    Ok(out)
}

pub fn default_weyl_lambda() -> f64 {
    48f64.powf(1.0 / 3.0)
}

pub fn spectra(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let sp = &cfg.spectra;
    let cat = spectra::harmonic_catalog(sp.hbar, sp.lambda_max, sp.offset).map_err(num("harmonic_catalog"))?;
    let mut levels = Artifact::new("harmonic_levels", &["spectra.harmonic_levels"], &["level", "energy", "degeneracy"]);
    for (i, l) in cat.levels.iter().enumerate() {
        levels.push(vec![i.into(), l.energy.into(), l.degeneracy.into()]);
    }
    let lambda = sp.weyl_lambda.unwrap_or_else(default_weyl_lambda);
    let ns = cfg.sweep.n.clone().unwrap_or_else(|| match sp.weyl_trap {
        WeylTrap::Harmonic3d { .. } => vec![1000, 10_000, 100_000, 1_000_000],
        WeylTrap::Fd1d { .. } => vec![10, 40, 100],
    });
    let scan = spectra::weyl_error_scan(&sp.weyl_trap, &ns, lambda).map_err(num("weyl_error_scan"))?;
    let mut t = Artifact::new(
        "weyl_scan",
        &["spectra.weyl"],
        &["n", "hbar", "n_q", "n_n_cl", "n_err", "e_q", "n_e_cl", "e_err"],
    );
    for r in &scan.rows {
        t.push(vec![
            r.n.into(),
            r.hbar.into(),
            r.n_q.into(),
            r.n_cl_scaled.into(),
            r.n_err.into(),
            r.e_q.into(),
            r.e_cl_scaled.into(),
            r.e_err.into(),
        ]);
    }
    let mut fit = Artifact::new(
        "weyl_fit",
        &["spectra.weyl"],
        &["lambda", "n_exponent", "e_exponent", "envelope", "per_particle_decreasing"],
    );
    fit.push(vec![
        lambda.into(),
        maybe(scan.n_exponent),
        maybe(scan.e_exponent),
        (8.0 / 9.0).into(),
        scan.per_particle_decreasing.into(),
    ]);
    let rows = spectra::free_density_sweep(&sp.free_density_n).map_err(num("free_ground_state_density"))?;
    let mut fd = Artifact::new("free_density", &["spectra.free_density"], &["n", "m", "hbar", "mass", "l1_distance"]);
    for r in &rows {
        fd.push(vec![r.n.into(), r.m.into(), r.hbar.into(), r.mass.into(), r.l1_distance.into()]);
    }
    Ok(vec![levels, t, fit, fd])
}

/// Finite-difference catalog fine enough for coherent states of width
/// `√ℏ_x` (at least twelve nodes across).
pub fn coherent_catalog(trap: &Trap1d, hbar: f64, lambda_max: f64) -> Result<SpectralCatalog, CliError> {
    let split = HbarSplit::default_for(hbar);
    let (l, pts) = spectra::fd_domain(trap, hbar, lambda_max, 60.0);
    let pts = pts.max((2.0 * l / (split.hbar_x.sqrt() / 12.0)).ceil() as usize);
    spectra::fd_catalog_1d(trap, hbar, l, pts, lambda_max).map_err(num("fd_catalog_1d"))
}

pub fn husimi(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let h = &cfg.husimi;
    let mut t = Artifact::new(
        "husimi",
        &["husimi.resolution", "husimi.kinetic", "husimi.potential", "husimi.low_frequency"],
        &[
            "hbar",
            "hbar_x",
            "hbar_p",
            "fill",
            "resolution_residual",
            "kinetic_excess",
            "kinetic_expected_excess",
            "kinetic_identity_residual",
            "potential_identity_residual",
            "p_f",
            "lowfreq_identity_residual",
            "m_min",
            "m_max",
        ],
    );
    for &hbar in &h.hbar {
        let cat = coherent_catalog(&h.trap, hbar, h.lambda_max)?;
        let r = spectra::coherent_identity_check_1d(&cat, h.fill, HbarSplit::default_for(hbar), h.p_f)
            .map_err(num("coherent_identity_check_1d"))?;
        t.push(vec![
            r.hbar.into(),
            r.hbar_x.into(),
            r.hbar_p.into(),
            r.fill.into(),
            r.resolution_residual.into(),
            r.kinetic_excess.into(),
            r.kinetic_expected_excess.into(),
            r.kinetic_identity_residual.into(),
            r.potential_identity_residual.into(),
            r.p_f.into(),
            r.lowfreq_identity_residual.into(),
            r.m_min.into(),
            r.m_max.into(),
        ]);
    }
    Ok(vec![t])
}

fn contexts(cfg: &RunConfig, default_n: &[u64], default_beta: &[f64], tol: Tolerance) -> Result<Vec<ScalingContext>, CliError> {
    let w = cfg.interaction()?;
    let ns = cfg.sweep.n.clone().unwrap_or_else(|| default_n.to_vec());
    let betas = cfg.sweep.beta.clone().unwrap_or_else(|| default_beta.to_vec());
    let base = ScalingContext::new(ns[0].max(2), betas[0], w, tol).map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = Vec::new();
    for &beta in &betas {
        for &n in &ns {
            let c = ScalingContext::with_scattering_length(n, beta, base.interaction.clone(), base.a_w)
                .map_err(|e| CliError::Config(e.to_string()))?;
            out.push(c);
        }
    }
    Ok(out)
}

pub fn predict(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let v = cfg.potential()?;
    let tol = cfg.tolerance;
    let sol = thomas_fermi::tf_solve(&v, tol).map_err(num("tf_solve"))?;
    let mut t = Artifact::new(
        "prediction",
        &["asymptotics.prediction"],
        &["n", "beta", "a_w", "main", "correction", "total", "relative_correction"],
    );
    for c in contexts(cfg, &[1_000_000], &[0.4], tol)? {
        let p = asymptotics::prediction_from(&sol, &c);
        t.push(vec![
            c.n.into(),
            c.beta.into(),
            c.a_w.into(),
            p.main.into(),
            p.correction.into(),
            p.total.into(),
            p.relative_correction.into(),
        ]);
    }
    Ok(vec![t])
}

pub fn boxes(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let v = cfg.potential()?;
    let tol = cfg.tolerance;
    let sol = thomas_fermi::tf_solve(&v, tol).map_err(num("tf_solve"))?;
    let mut windows = Artifact::new(
        "windows",
        &["asymptotics.window"],
        &["n", "beta", "beta_exact", "e_hi", "e_lo1", "e_lo2", "feasible", "lower_bound_regime", "l"],
    );
    let mut summary = Artifact::new(
        "boxes_summary",
        &["asymptotics.boxes", "asymptotics.prediction"],
        &[
            "n",
            "beta",
            "l",
            "r",
            "r_over_l",
            "boxes",
            "particles",
            "kinetic_interaction",
            "potential",
            "total",
            "prediction_total",
            "ratio",
            "sigma_rho_5_3",
            "int_rho_5_3",
            "sigma_rho_2",
            "int_rho_2",
        ],
    );
    let mut cells: Option<Artifact> = None;
    for c in contexts(cfg, &[1_000_000], &[0.4], tol)? {
        let beta = asymptotics::beta_from_f64(c.beta).map_err(|e| CliError::Config(e.to_string()))?;
        let w = asymptotics::beta_l_window(beta, c.n);
        windows.push(vec![
            c.n.into(),
            c.beta.into(),
            w.beta_exact.clone().into(),
            w.e_hi.into(),
            w.e_lo1.into(),
            w.e_lo2.into(),
            w.feasible.into(),
            w.lower_bound_regime.into(),
            w.l.map_or(Cell::Text("none".into()), Cell::Float),
        ]);
        let Some(l) = w.l else { continue };
        let est = asymptotics::box_estimate(&sol, &c, l).map_err(num("box_estimate"))?;
        summary.push(vec![
            est.n.into(),
            est.beta.into(),
            est.l.into(),
            est.r.into(),
            est.r_over_l.into(),
            est.boxes.len().into(),
            est.particles.into(),
            est.kinetic_interaction.into(),
            est.potential.into(),
            est.total.into(),
            est.prediction_total.into(),
            est.ratio.into(),
            est.sigma_rho_5_3.into(),
            est.continuum_rho_5_3.into(),
            est.sigma_rho_2.into(),
            est.continuum_rho_2.into(),
        ]);
        if cells.is_none() {
            let mut a = Artifact::new(
                "box_cells",
                &["asymptotics.boxes"],
                &["cx", "cy", "cz", "cell_mass", "m", "sup_v", "kinetic_interaction", "potential"],
            );
            for b in &est.boxes {
                a.push(vec![
                    b.center[0].into(),
                    b.center[1].into(),
                    b.center[2].into(),
                    b.cell_mass.into(),
                    b.m.into(),
                    b.sup_v.into(),
                    b.kinetic_interaction.into(),
                    b.potential.into(),
                ]);
            }
            cells = Some(a);
        }
    }
    let mut out = vec![windows, summary];
    out.extend(cells);
    Ok(out)
}

pub fn budget(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let ns = cfg.sweep.n.clone().unwrap_or_else(|| vec![10_000, 1_000_000, 100_000_000]);
    let betas = cfg.sweep.beta.clone().unwrap_or_else(|| vec![0.40, 0.45, 0.49]);
    let rule = match cfg.epsilon {
        Some(epsilon) => EpsilonRule::Explicit { epsilon },
        None => EpsilonRule::Default,
    };
    let mut t = Artifact::new(
        "budget",
        &["asymptotics.budget"],
        &[
            "n",
            "beta",
            "epsilon",
            "delta",
            "p_f",
            "s",
            "r",
            "term_semiclassical",
            "term_momentum_cutoff",
            "term_localization",
            "term_dyson",
            "total",
            "ratio",
            "epsilon_admissible",
        ],
    );
    for &beta in &betas {
        for &n in &ns {
            let b = asymptotics::error_budget(n, beta, rule).map_err(|e| CliError::Config(e.to_string()))?;
            t.push(vec![
                b.n.into(),
                b.beta.into(),
                b.epsilon.into(),
                b.delta.into(),
                b.p_f.into(),
                b.s.into(),
                b.r.into(),
                b.term_semiclassical.into(),
                b.term_momentum_cutoff.into(),
                b.term_localization.into(),
                b.term_dyson.into(),
                b.total.into(),
                b.ratio.into(),
                b.epsilon_admissible.into(),
            ]);
        }
    }
    Ok(vec![t])
}
