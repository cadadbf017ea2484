//! One runner per command. Each writes its files through [`Outputs`] and
//! returns short summary lines for the terminal.

use std::path::PathBuf;

use anyhow::Context;
use qfc_chaos::{
    bell_purify_iterate, box_counting_dimension, boundary_mask, dyadic_sizes, julia_raster,
    perturbed_bell_fixture, MapParams, RasterJob,
};
use qfc_entanglement::{entangle_ensemble, maximally_mixed, ProtocolConfig};
use qfc_purification as purification;
use qfc_qstate::ops::{sigma_x, sigma_z};
use qfc_qstate::{c64, DensityMatrix, PureState};
use qfc_sme::{lindblad_step, run_trajectory, sme_step, spin_ensemble_model, ControlLaw, SmeModel, SmeRun};
use qfc_stabilization::{
    f1_do_nothing, f3_discriminate_prepare, gap_surface, optimal_chi, simulate, Scheme,
};
use qfc_stochastic::{par_map_indexed, run_ensemble, RngStream};

use crate::config::{CommandName, ExperimentConfig};
use crate::output::{fmt_real, Outputs};

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

fn r(x: f64) -> String {
    fmt_real(x)
}

pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<RunReport> {
    let mut out = Outputs::new(&cfg.out_path, cfg.preamble())?;
    let summary = match cfg.command {
        CommandName::Stabilize => stabilize(cfg, &mut out),
        CommandName::Purify => purify(cfg, &mut out),
        CommandName::Entangle => entangle(cfg, &mut out),
        CommandName::Bellpurify => bellpurify(cfg, &mut out),
        CommandName::Julia => julia(cfg, &mut out),
        CommandName::SmeRun => sme_run(cfg, &mut out),
        CommandName::SpinCollapse => spin_collapse(cfg, &mut out),
    }
    .with_context(|| format!("{} failed", cfg.command))?;
    Ok(RunReport {
        files: out.written,
        summary,
    })
}

fn stabilize(cfg: &ExperimentConfig, out: &mut Outputs) -> anyhow::Result<Vec<String>> {
    let (p, theta) = (cfg.real("p"), cfg.real("theta"));
    let surface = gap_surface(cfg.count("n-p") as usize, cfg.count("n-theta") as usize)?;
    out.csv(
        "stabilize_surface.csv",
        &["p", "theta", "f1", "f3", "f4", "gap", "chi_opt"],
        surface
            .rows
            .iter()
            .map(|g| vec![r(g.p), r(g.theta), r(g.f1), r(g.f3), r(g.f4), r(g.gap), r(g.chi_opt)]),
    )?;
    out.csv(
        "stabilize_summary.csv",
        &["argmax_p", "argmax_theta", "max_gap", "min_gap"],
        [vec![r(surface.argmax.0), r(surface.argmax.1), r(surface.max), r(surface.min)]],
    )?;

    let (chi, f4) = optimal_chi(p, theta)?;
    let samples = cfg.count("samples");
    let schemes = [
        ("do_nothing", Scheme::DoNothing, f1_do_nothing(p, theta)),
        ("discriminate_prepare", Scheme::DiscriminatePrepare, f3_discriminate_prepare(p, theta)),
        ("weak_feedback", Scheme::weak(chi), f4),
    ];
    let mut rows = Vec::new();
    for (name, scheme, exact) in schemes {
        let est = simulate(scheme, p, theta, samples, cfg.seed)?;
        rows.push(vec![
            name.to_string(),
            r(est.mean),
            r(est.std_error),
            r(exact),
            r(est.z_score(exact)),
        ]);
    }
    out.csv("stabilize_mc.csv", &["scheme", "mean", "std_error", "closed_form", "z_score"], rows)?;
    Ok(vec![
        format!("gap maximum {:.5} at p = {:.4}, θ = {:.4}", surface.max, surface.argmax.0, surface.argmax.1),
        format!("optimal χ at (p, θ) = ({p}, {theta}): {chi:.6}, F4 = {f4:.6}"),
    ])
}

fn purify(cfg: &ExperimentConfig, out: &mut Outputs) -> anyhow::Result<Vec<String>> {
    let (k, dt, horizon) = (cfg.real("k"), cfg.real("dt"), cfg.real("horizon"));
    let n = cfg.count("checkpoints");
    let ts: Vec<f64> = (1..=n).map(|i| horizon * i as f64 / n as f64).collect();
    let est = purification::nofeedback_ensemble(k, dt, &ts, cfg.count("trajectories"), cfg.seed)?;
    let mut rows = Vec::new();
    for e in &est {
        rows.push(vec![
            r(e.t),
            r(e.mean),
            r(e.std_error),
            r(purification::nofeedback_impurity(e.t, k)?),
            r(purification::feedback_impurity_exact(0.5, k, e.t)),
        ]);
    }
    out.csv(
        "purify_ensemble.csv",
        &["t", "mc_impurity", "std_error", "quadrature", "feedback_exact"],
        rows,
    )?;
    let target = cfg.real("target");
    let t_fb = purification::time_to_target_feedback(0.5, target, k)?;
    let t_cl = purification::time_to_target_nofeedback(target, k)?;
    let ratio = purification::speedup_ratio(target, k)?;
    out.csv(
        "purify_speedup.csv",
        &["target", "t_feedback", "t_nofeedback", "ratio"],
        [vec![r(target), r(t_fb), r(t_cl), r(ratio)]],
    )?;
    Ok(vec![format!("time-to-target ratio at {target}: {ratio:.4}")])
}

fn entangle(cfg: &ExperimentConfig, out: &mut Outputs) -> anyhow::Result<Vec<String>> {
    let k = cfg.real("k");
    let mut pc = ProtocolConfig::new(k, cfg.real("dt"), cfg.seed);
    pc.horizon = cfg.real("budget") / k;
    pc.sample_every = cfg.count("sample-every");
    pc.validate()?;
    let runs = entangle_ensemble(&maximally_mixed(), &pc, cfg.count("runs"));
    let mut rows = Vec::new();
    let mut good = 0;
    for (i, res) in runs.iter().enumerate() {
        match res {
            Ok(o) => {
                if o.final_r_squared > 2.9 {
                    good += 1;
                }
                rows.push(vec![
                    i.to_string(),
                    "ok".into(),
                    r(o.stage1_time),
                    r(o.stage2_time),
                    r(o.final_r_squared),
                    r(o.final_fidelity),
                ]);
            }
            Err(e) => rows.push(vec![i.to_string(), e.to_string(), String::new(), String::new(), String::new(), String::new()]),
        }
    }
    out.csv(
        "entangle_runs.csv",
        &["run", "status", "stage1_time", "stage2_time", "final_r_squared", "final_fidelity"],
        rows,
    )?;
    let path = match runs.first() {
        Some(Ok(o)) => o
            .samples
            .iter()
            .map(|s| vec![r(s.t), r(s.r_squared), r(s.leakage), r(s.q1_z), r(s.q2_purity), r(s.fidelity_to_bell)])
            .collect(),
        _ => Vec::new(),
    };
    out.csv(
        "entangle_path.csv",
        &["t", "r_squared", "leakage", "q1_z", "q2_purity", "fidelity_to_bell"],
        path,
    )?;
    Ok(vec![format!("{good} of {} runs reached R² > 2.9", runs.len())])
}

fn bellpurify(cfg: &ExperimentConfig, out: &mut Outputs) -> anyhow::Result<Vec<String>> {
    let it = bell_purify_iterate(&perturbed_bell_fixture(), cfg.count("steps") as usize, cfg.real("x"), cfg.real("phi"))?;
    out.csv(
        "bellpurify.csv",
        &["step", "fidelity"],
        it.fidelities.iter().enumerate().map(|(k, f)| vec![k.to_string(), r(*f)]),
    )?;
    let last = it.fidelities.last().copied().unwrap_or(f64::NAN);
    Ok(vec![format!("F_0 = {:.4}, F_last = {last:.6}", it.fidelities[0])])
}

pub fn julia_job(cfg: &ExperimentConfig) -> RasterJob {
    let (width, height) = cfg.grid("grid");
    RasterJob {
        re_min: cfg.real("re-min"),
        re_max: cfg.real("re-max"),
        im_min: cfg.real("im-min"),
        im_max: cfg.real("im-max"),
        width,
        height,
        max_iters: cfg.count("max-iters") as usize,
        cycle_tol: cfg.real("cycle-tol"),
        params: MapParams::new(c64(cfg.real("p-re"), cfg.real("p-im"))),
    }
}

fn julia(cfg: &ExperimentConfig, out: &mut Outputs) -> anyhow::Result<Vec<String>> {
    let job = julia_job(cfg);
    let grid = julia_raster(&job)?;
    out.pgm("julia.pgm", &grid)?;
    out.raster_csv("julia.csv", &job, &grid)?;
    let mask = boundary_mask(&grid);
    let boundary = mask.iter().filter(|&&b| b).count();
    let max_box = (job.width.min(job.height) / 8).max(2);
    let dim = box_counting_dimension(&mask, job.width, job.height, &dyadic_sizes(max_box)).unwrap_or(f64::NAN);
    out.csv(
        "julia_summary.csv",
        &["non_convergent", "boundary_pixels", "box_dimension"],
        [vec![grid.non_convergent().to_string(), boundary.to_string(), r(dim)]],
    )?;
    Ok(vec![format!(
        "{} non-convergent pixels, boundary box dimension {dim:.3}",
        grid.non_convergent()
    )])
}

fn sme_run(cfg: &ExperimentConfig, out: &mut Outputs) -> anyhow::Result<Vec<String>> {
    let (k, dt) = (cfg.real("k"), cfg.real("dt"));
    let steps = cfg.count("steps");
    let every = cfg.count("sample-every");
    let model = SmeModel::continuous_measurement(sigma_z(), k)?;
    let plus = PureState::normalized(vec![c64(1.0, 0.0), c64(1.0, 0.0)])?.density();
    let sample_at: Vec<u64> = (0..=steps).filter(|n| n % every == 0 || *n == steps).collect();
    let sx = sigma_x();
    let stats = run_ensemble(cfg.count("trajectories"), cfg.seed, sample_at.len(), |rng, obs| {
        let mut rho = plus.clone();
        let mut j = 0;
        for n in 0..=steps {
            if sample_at[j] == n {
                obs[j] = rho.expect(&sx);
                j += 1;
            }
            if n < steps {
                rho = sme_step(&model, n as f64 * dt, &rho, dt, &[rng.wiener(dt)])?;
            }
        }
        Ok(())
    })?;
    let mut avg = plus.clone();
    let mut lind = Vec::with_capacity(sample_at.len());
    let mut j = 0;
    for n in 0..=steps {
        if sample_at[j] == n {
            lind.push(avg.expect(&sx));
            j += 1;
        }
        if n < steps {
            avg = lindblad_step(&model, n as f64 * dt, &avg, dt)?;
        }
    }
    let se = stats.std_error();
    let rows = sample_at.iter().enumerate().map(|(j, &n)| {
        let t = n as f64 * dt;
        vec![r(t), r(stats.mean[j]), r(se[j]), r(lind[j]), r((-4.0 * k * t).exp())]
    });
    out.csv("sme_run.csv", &["t", "mean_sx", "std_error", "lindblad_sx", "analytic_sx"], rows)?;
    let last = sample_at.len() - 1;
    Ok(vec![format!(
        "⟨σx⟩ at t = {}: ensemble {:.5} ± {:.5}, master equation {:.5}",
        steps as f64 * dt,
        stats.mean[last],
        se[last],
        lind[last]
    )])
}

fn spin_collapse(cfg: &ExperimentConfig, out: &mut Outputs) -> anyhow::Result<Vec<String>> {
    let two_j = cfg.count("two-j") as u32;
    let model = spin_ensemble_model(two_j, ControlLaw::Constant(0.0), 0.0, cfg.real("m"), cfg.real("eta"), None)?;
    let d = two_j as usize + 1;
    let rho0 = DensityMatrix::maximally_mixed(d);
    let run = SmeRun {
        dt: cfg.real("dt"),
        steps: cfg.count("steps"),
        sample_every: cfg.count("steps"),
        options: Default::default(),
    };
    let n = cfg.count("trajectories") as usize;
    let finals = par_map_indexed(n, |i| {
        let mut rng = RngStream::new(cfg.seed, i as u64);
        run_trajectory(&model, &rho0, &run, &mut rng).map(|t| t.states.last().cloned().expect("final state"))
    });
    let mut rows = Vec::with_capacity(n);
    let mut hits = vec![0u64; d];
    for (i, f) in finals.into_iter().enumerate() {
        let rho = f.with_context(|| format!("trajectory {i}"))?;
        let pops: Vec<f64> = (0..d).map(|l| rho.matrix()[(l, l)].re).collect();
        let (level, _) = pops
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (l, &v)| if v > best.1 { (l, v) } else { best });
        hits[level] += 1;
        let top = rho.eigenvalues().into_iter().fold(f64::MIN, f64::max);
        rows.push(vec![i.to_string(), level.to_string(), r(top)]);
    }
    out.csv("spin_collapse.csv", &["trajectory", "level", "max_eigenvalue"], rows)?;
    let summary_rows = (0..d).map(|l| {
        let frac = hits[l] as f64 / n as f64;
        let se = (frac * (1.0 - frac) / n as f64).sqrt();
        vec![l.to_string(), r(rho0.matrix()[(l, l)].re), r(frac), r(se)]
    });
    out.csv(
        "spin_collapse_summary.csv",
        &["level", "initial_weight", "collapse_fraction", "std_error"],
        summary_rows,
    )?;
    Ok(vec![format!("collapse counts per F_z level: {hits:?}")])
}
