//! Scenario pipelines: build the model from the config, call into the core
//! library, and flatten the results into records.

use std::time::Instant;

use gwphase_core::biortho::{track_branches, EigenbranchPath, HamiltonianLoop};
use gwphase_core::bornopp::{bo_potentials, flux_equivalence, ring_spectrum, FastFamily};
use gwphase_core::dynamics::evolve;
use gwphase_core::geomphase::{aa_phase, phase_line_integral, phase_naive, phase_surface_integral};
use gwphase_core::numerics::{wrap_principal, ComplexMatrix};
use gwphase_core::scenarios::{
    ac_geometric_phase, cone_chart, cone_loop, cycle_eigenpolarizations, effective_moment,
    helical_fiber_loop, sequence_phase_extract, topological_factor, winding_number, AcModel,
    ComplexCone, Handedness, JonesSegment, PlanarPath,
};
use gwphase_core::Complex64;

use crate::config::{
    AcParams, AdiabaticParams, BoParams, ConeParams, HelixParams, JonesParams, RunConfig, Scenario,
};
use crate::records::RunRecord;
use crate::{CliError, Result};

const TRACK_TOL: f64 = 1e-9;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Stable listing of the available scenarios.
pub fn list_scenarios() -> Vec<(&'static str, &'static str)> {
    vec![
        ("cone", "two-level complex-cone loop: line-integral, naive, and AA phases"),
        ("jones", "dichroic crystal pair: merged vs separated cyclic amplitudes"),
        ("helix", "rotating-generator optical fiber loop, per-branch phases"),
        ("ac", "metastable moment around a line charge: winding factors"),
        ("bo", "fast branch on a ring: complex potentials and slow spectrum"),
        ("stokes", "surface integral of the two-form against the boundary loop"),
        ("adiabatic", "extraction error sweep over cycle durations"),
    ]
}

/// Execute a validated config, producing its records (deterministic order).
pub fn run(config: &RunConfig) -> Result<Vec<RunRecord>> {
    let started = Instant::now();
    let mut records = match &config.scenario {
        Scenario::Cone(p) => run_cone(p, config)?,
        Scenario::Jones(p) => run_jones(p)?,
        Scenario::Helix(p) => run_helix(p, config)?,
        Scenario::Ac(p) => run_ac(p)?,
        Scenario::Bo(p) => run_bo(p, config)?,
        Scenario::Stokes(p) => run_stokes(p, config)?,
        Scenario::Adiabatic(p) => run_adiabatic(p, config)?,
    };
    let elapsed = started.elapsed().as_secs_f64();
    for r in &mut records {
        r.wall_time_s = elapsed;
    }
    Ok(records)
}

fn cone_spec(b: Complex64, theta: Complex64, period: f64) -> ComplexCone {
    ComplexCone {
        field_strength: b,
        polar_angle: theta,
        period,
        handedness: Handedness::CounterClockwise,
    }
}

/// Branch whose initial eigenvalue is closest to +b/2 (the branch aligned
/// with the field).
fn aligned_branch(lp: &HamiltonianLoop, b: Complex64) -> Result<(usize, EigenbranchPath)> {
    let branches = track_branches(lp, TRACK_TOL)?;
    let target = b * 0.5;
    Ok(branches
        .into_iter()
        .enumerate()
        .min_by(|(_, x), (_, y)| {
            let dx = (x.omega(0) - target).norm();
            let dy = (y.omega(0) - target).norm();
            dx.partial_cmp(&dy).unwrap()
        })
        .expect("two-level loop has branches"))
}

fn push_params_cone(r: &mut RunRecord, p: &ConeParams, samples: usize) {
    r.push_f64("b_re", p.b_re)
        .push_f64("b_im", p.b_im)
        .push_f64("theta_re", p.theta_re)
        .push_f64("theta_im", p.theta_im)
        .push_f64("period", p.period)
        .push_int("samples", samples as i64);
}

fn run_cone(p: &ConeParams, config: &RunConfig) -> Result<Vec<RunRecord>> {
    let samples = config.resolution.samples.max(100);
    let spec = cone_spec(c64(p.b_re, p.b_im), c64(p.theta_re, p.theta_im), p.period);
    let lp = cone_loop(&spec, samples)?;
    let (_, branch) = aligned_branch(&lp, spec.field_strength)?;

    let line = phase_line_integral(&branch)?;
    let naive = phase_naive(&branch)?;
    let hermitian = lp.hermiticity_defect() < 1e-12;
    let aa_re = if hermitian {
        Some(aa_phase(&branch)?.value().re)
    } else {
        None
    };

    let mut r = RunRecord::new("cone");
    push_params_cone(&mut r, p, samples);
    r.push_f64("line_re", line.value().re)
        .push_f64("line_im", line.value().im)
        .push_f64("line_principal_re", line.principal_re())
        .push_int("line_winding", line.real_part_branch() as i64)
        .push_f64("naive_re", naive.value().re)
        .push_f64("naive_im", naive.value().im)
        .push_opt_f64("aa_re", aa_re)
        .push_f64("max_integrand", line.max_integrand());
    Ok(vec![r])
}

fn run_jones(p: &JonesParams) -> Result<Vec<RunRecord>> {
    let kappa = p.kappa_l;
    let angle = p.rot_deg.to_radians();
    let base = JonesSegment::new(
        ComplexMatrix::diagonal(&[Complex64::default(), c64(0.0, -kappa)]),
        1.0,
        "crystal a",
    )?;
    let (s, c) = angle.sin_cos();
    let mut rot = ComplexMatrix::zeros(2);
    rot[(0, 0)] = c64(0.0, -kappa * s * s);
    rot[(0, 1)] = c64(0.0, kappa * s * c);
    rot[(1, 0)] = c64(0.0, kappa * s * c);
    rot[(1, 1)] = c64(0.0, -kappa * c * c);
    let rotated = JonesSegment::new(rot, 1.0, "crystal b")?;

    let merged = vec![
        JonesSegment::vacuum(1.0),
        base.clone(),
        rotated.clone(),
        JonesSegment::vacuum(1.0),
    ];
    let reference = vec![
        JonesSegment::vacuum(1.0),
        base,
        JonesSegment::vacuum(1.0),
        rotated,
        JonesSegment::vacuum(1.0),
    ];
    let eigen = cycle_eigenpolarizations(&merged)?;
    let input = &eigen[0].1;
    let phase = sequence_phase_extract(&merged, &reference, input)?;
    let null = sequence_phase_extract(&reference, &reference, input)?;

    let mut r = RunRecord::new("jones");
    r.push_f64("kappa_l", p.kappa_l)
        .push_f64("rot_deg", p.rot_deg)
        .push_f64("phase_re", phase.value().re)
        .push_f64("phase_im", phase.value().im)
        .push_f64("cycle_eigenvalue_abs", eigen[0].0.norm())
        .push_f64("null_check_abs", null.value().norm());
    Ok(vec![r])
}

fn run_helix(p: &HelixParams, config: &RunConfig) -> Result<Vec<RunRecord>> {
    let samples = config.resolution.samples.max(100);
    let mut generator =
        ComplexMatrix::diagonal(&[c64(p.nu1_re, p.nu1_im), c64(p.nu2_re, p.nu2_im)]);
    if p.circular != 0.0 {
        generator[(0, 1)] += c64(-p.circular, 0.0);
        generator[(1, 0)] += c64(p.circular, 0.0);
    }
    if p.kappa > 0.0 {
        // Absorption along a rotated axis: R(chi) diag(0, -i kappa) R(-chi).
        let chi = p.dichroic_axis_deg.to_radians();
        let (s, c) = chi.sin_cos();
        generator[(0, 0)] += c64(0.0, -p.kappa * s * s);
        generator[(0, 1)] += c64(0.0, p.kappa * s * c);
        generator[(1, 0)] += c64(0.0, p.kappa * s * c);
        generator[(1, 1)] += c64(0.0, -p.kappa * c * c);
    }
    let rate = 2.0 * std::f64::consts::PI / p.length;
    let lp = helical_fiber_loop(rate, &generator, p.length, samples)?;
    let hermitian = lp.hermiticity_defect() < 1e-12;
    let branches = track_branches(&lp, TRACK_TOL)?;

    let mut records = Vec::with_capacity(branches.len());
    for branch in &branches {
        let line = phase_line_integral(branch)?;
        let mut r = RunRecord::new("helix");
        r.push_f64("nu1_re", p.nu1_re)
            .push_f64("nu1_im", p.nu1_im)
            .push_f64("nu2_re", p.nu2_re)
            .push_f64("nu2_im", p.nu2_im)
            .push_f64("circular", p.circular)
            .push_f64("kappa", p.kappa)
            .push_f64("dichroic_axis_deg", p.dichroic_axis_deg)
            .push_f64("length", p.length)
            .push_int("samples", samples as i64)
            .push_int("branch", branch.branch_index() as i64)
            .push_f64("omega_re", branch.omega(0).re)
            .push_f64("omega_im", branch.omega(0).im)
            .push_f64("line_re", line.value().re)
            .push_f64("line_im", line.value().im)
            .push_int("line_winding", line.real_part_branch() as i64)
            .push_int("hermitian", hermitian as i64);
        records.push(r);
    }
    Ok(records)
}

fn run_ac(p: &AcParams) -> Result<Vec<RunRecord>> {
    let h_int = ComplexMatrix::from_rows(&[
        vec![c64(p.e1_re, p.e1_im), c64(p.coupling, 0.0)],
        vec![c64(p.coupling, 0.0), c64(p.e2_re, p.e2_im)],
    ])
    .map_err(CliError::Numerical)?;
    let moment = ComplexMatrix::diagonal(&[c64(1.0, 0.0), c64(-1.0, 0.0)]);
    let path = PlanarPath::circle(p.radius, p.windings, 256)?;
    let model = AcModel::new(h_int, moment, p.rho, path)?;

    let mu = effective_moment(&model, p.branch, 1e-10)?;
    let winding = winding_number(&model.path)?;
    let phase = ac_geometric_phase(&model, p.branch, 1e-10)?;
    let factor = topological_factor(mu, p.rho, &model.path)?;

    let mut r = RunRecord::new("ac");
    r.push_f64("e1_re", p.e1_re)
        .push_f64("e1_im", p.e1_im)
        .push_f64("e2_re", p.e2_re)
        .push_f64("e2_im", p.e2_im)
        .push_f64("coupling", p.coupling)
        .push_f64("rho", p.rho)
        .push_int("windings", p.windings as i64)
        .push_int("branch", p.branch as i64)
        .push_f64("mu_re", mu.re)
        .push_f64("mu_im", mu.im)
        .push_int("winding_measured", winding.turns)
        .push_f64("phase_re", phase.value().re)
        .push_f64("phase_im", phase.value().im)
        .push_f64("topological_factor_abs", factor.topological.norm())
        .push_f64("endpoint_factor_abs", factor.endpoint.norm());
    Ok(vec![r])
}

fn run_bo(p: &BoParams, config: &RunConfig) -> Result<Vec<RunRecord>> {
    let grid_n = config.resolution.grid_n;
    let samples = config.resolution.samples.max(100);
    let b = c64(p.b_re, p.b_im);
    let theta = c64(p.theta_re, p.theta_im);
    let family = FastFamily::new(
        Box::new(move |q| {
            cone_spec(b, theta, 2.0 * std::f64::consts::PI).hamiltonian(q)
        }),
        Box::new(|_| 0.0),
        p.mass,
    )?;

    // Fast branch aligned with the field.
    let lp = cone_loop(&cone_spec(b, theta, 2.0 * std::f64::consts::PI), samples)?;
    let (branch_index, branch) = aligned_branch(&lp, b)?;
    let fast_phase = phase_line_integral(&branch)?;

    let pot = bo_potentials(&family, branch_index, grid_n, TRACK_TOL)?;
    let spectrum = ring_spectrum(&pot, 1e-8)?;
    let flux_dev = flux_equivalence(&pot, &|q: f64| 0.3 * q.sin(), 1e-8)?;
    let loop_a = pot.loop_integral_a();

    let mut r = RunRecord::new("bo");
    r.push_f64("b_re", p.b_re)
        .push_f64("b_im", p.b_im)
        .push_f64("theta_re", p.theta_re)
        .push_f64("theta_im", p.theta_im)
        .push_f64("mass", p.mass)
        .push_int("grid_n", grid_n as i64)
        .push_f64("loop_a_re", loop_a.re)
        .push_f64("loop_a_im", loop_a.im)
        .push_f64("fast_phase_re", fast_phase.value().re)
        .push_f64("fast_phase_im", fast_phase.value().im)
        .push_f64("flux_deviation", flux_dev);
    // Four smallest-|Re| slow eigenvalues.
    let mut sorted = spectrum;
    sorted.sort_by(|a, b| a.re.abs().partial_cmp(&b.re.abs()).unwrap());
    for (k, z) in sorted.iter().take(4).enumerate() {
        r.push_f64(&format!("eig{k}_re"), z.re);
        r.push_f64(&format!("eig{k}_im"), z.im);
    }
    Ok(vec![r])
}

fn run_stokes(p: &ConeParams, config: &RunConfig) -> Result<Vec<RunRecord>> {
    let samples = config.resolution.samples.max(100);
    let n = config.resolution.surface_n.max(8);
    let b = c64(p.b_re, p.b_im);
    let theta = c64(p.theta_re, p.theta_im);
    let spec = cone_spec(b, theta, p.period);

    let lp = cone_loop(&spec, samples)?;
    let (branch_index, branch) = aligned_branch(&lp, b)?;
    let line = phase_line_integral(&branch)?;
    let surface = cone_chart(&spec, n, n)?;
    let surf = phase_surface_integral(&surface, branch_index, TRACK_TOL)?;

    let mut r = RunRecord::new("stokes");
    push_params_cone(&mut r, p, samples);
    r.push_int("surface_n", n as i64)
        .push_f64("line_re", line.value().re)
        .push_f64("line_im", line.value().im)
        .push_f64("surface_re", surf.value().re)
        .push_f64("surface_im", surf.value().im)
        .push_f64(
            "diff_re_mod_2pi",
            wrap_principal(line.value().re - surf.value().re).abs(),
        )
        .push_f64("diff_im", (line.value().im - surf.value().im).abs());
    Ok(vec![r])
}

/// Thread cap for sweep points: `GWPHASE_THREADS`, default = available
/// parallelism.
fn thread_cap(points: usize) -> usize {
    let default = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let cap = std::env::var("GWPHASE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(default);
    cap.min(points).max(1)
}

fn run_adiabatic(p: &AdiabaticParams, config: &RunConfig) -> Result<Vec<RunRecord>> {
    let samples = config.resolution.samples.max(100);
    let b = c64(p.b_re, p.b_im);
    let theta = c64(p.theta_re, p.theta_im);

    // Records ordered by the period key regardless of scheduling.
    let mut periods = p.periods.clone();
    periods.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let threads = thread_cap(periods.len());
    let mut results: Vec<Option<gwphase_core::Result<(Complex64, Complex64)>>> =
        vec![None; periods.len()];
    std::thread::scope(|scope| {
        let chunks = periods.len().div_ceil(threads);
        for (chunk_index, (chunk, slot)) in periods
            .chunks(chunks)
            .zip(results.chunks_mut(chunks))
            .enumerate()
        {
            let _ = chunk_index;
            scope.spawn(move || {
                for (period, out) in chunk.iter().zip(slot.iter_mut()) {
                    *out = Some(evolve_once(b, theta, *period, samples, p.steps_per_unit_time));
                }
            });
        }
    });

    let mut records = Vec::with_capacity(periods.len());
    for (period, slot) in periods.iter().zip(results) {
        let (extracted, predicted) = slot.expect("sweep point computed")?;
        let mut r = RunRecord::new("adiabatic");
        r.push_f64("b_re", p.b_re)
            .push_f64("b_im", p.b_im)
            .push_f64("theta_re", p.theta_re)
            .push_f64("theta_im", p.theta_im)
            .push_f64("period", *period)
            .push_int("samples", samples as i64)
            .push_f64("extracted_re", extracted.re)
            .push_f64("extracted_im", extracted.im)
            .push_f64("predicted_re", predicted.re)
            .push_f64("predicted_im", predicted.im)
            .push_f64("error_abs", (extracted - predicted).norm());
        records.push(r);
    }
    Ok(records)
}

fn evolve_once(
    b: Complex64,
    theta: Complex64,
    period: f64,
    samples: usize,
    steps_per_unit_time: f64,
) -> gwphase_core::Result<(Complex64, Complex64)> {
    let spec = cone_spec(b, theta, period);
    let lp = cone_loop(&spec, samples)?;
    let branches = track_branches(&lp, TRACK_TOL)?;
    let target = b * 0.5;
    let (branch_index, _) = branches
        .iter()
        .enumerate()
        .min_by(|(_, x), (_, y)| {
            let dx = (x.omega(0) - target).norm();
            let dy = (y.omega(0) - target).norm();
            dx.partial_cmp(&dy).unwrap()
        })
        .expect("branches");
    let steps = ((period * steps_per_unit_time).ceil() as usize).max(samples);
    let result = evolve(&lp, branch_index, steps, TRACK_TOL)?;
    Ok((result.extracted_geometric, result.adiabatic_prediction))
}

/// Non-scenario helper used by `validate`: a one-line summary.
pub fn describe(config: &RunConfig) -> String {
    format!(
        "scenario {} -> {} ({})",
        config.scenario.name(),
        config
            .output_path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "stdout".into()),
        match config.output_format {
            crate::OutputFormat::Csv => "csv",
            crate::OutputFormat::Json => "json",
        }
    )
}
