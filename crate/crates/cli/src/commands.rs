use crate::report::{write_plot, Check, CliError, Report};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;
use std::path::Path;
use supersim_core::circuit::identity_suite;
use supersim_core::format::{load_state, LoadedState};
use supersim_core::linalg::{euclidean_distance, trace_distance, MAX_DIM_ENV};
use supersim_core::obstruction::{error_profile, obstruction_audit, phase_loop, refined_phase_loop_g, sweep_loop, Candidate, CandidateKind, Verdict};
use supersim_core::rng::SeedStream;
use supersim_core::superposer::{
    copies_budget, entangled_merit, entangled_superposition, implied_phase, m_threshold, n_threshold, outcome_merit, random_superposition,
    threshold, trace_floor, Budget, EntangledSuperposition, RandomSuperpositionOutcome, SuperpositionSpec,
};
use supersim_core::table1::Table1Report;
use supersim_core::tomo::{calibrate_schedule, setting_count, vector_tomography, Mode, TomographySchedule, VectorEstimate};
use supersim_core::vecfun::{canonical_vec, discontinuity_probe, vec_i};
use supersim_core::{PureDensity, StateVector};

/// `RE,IM` or `RE`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parse = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
    let z = match s.split_once(',') {
        Some((re, im)) => Complex64::new(parse(re)?, parse(im)?),
        None => Complex64::new(parse(s)?, 0.0),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

pub fn check_env() -> Result<(), CliError> {
    match std::env::var(MAX_DIM_ENV) {
        Ok(v) if !matches!(v.trim().parse::<usize>(), Ok(d) if d > 0) => {
            Err(CliError::validation(format!("{MAX_DIM_ENV}={v:?} is not a positive integer")))
        }
        _ => Ok(()),
    }
}

fn load(path: &Path) -> Result<LoadedState, CliError> {
    load_state(path).map_err(|e| CliError::input(path, e))
}

fn load_pure(path: &Path) -> Result<PureDensity, CliError> {
    load(path)?.to_pure().map_err(|e| CliError::input(path, e))
}

fn mode(exact: bool) -> Mode {
    if exact {
        Mode::Exact
    } else {
        Mode::Sampled
    }
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Serialize)]
struct Truth {
    trace_error: f64,
    vec_error: f64,
}

#[derive(Serialize)]
struct TomoResults {
    dim: usize,
    settings: usize,
    schedule: TomographySchedule,
    estimate: VectorEstimate,
    truth: Option<Truth>,
}

pub fn tomo(state: &Path, shots: u64, exact: bool, truth: Option<&Path>, seed: u64) -> Result<Report, CliError> {
    let rho = load_pure(state)?;
    let d = rho.dim();
    let reference = truth.map(load_pure).transpose()?;
    if let Some(t) = &reference {
        if t.dim() != d {
            return Err(CliError::validation(format!("truth has dim {}, state has dim {d}", t.dim())));
        }
    }
    let schedule = calibrate_schedule(d, shots)?;
    let estimate = vector_tomography(&rho, &schedule, SeedStream::new(seed).named("tomo"), mode(exact), None)?;
    let truth_report = match &reference {
        Some(t) => Some(Truth {
            trace_error: trace_distance(estimate.x.as_density(), t.as_density())?,
            vec_error: euclidean_distance(&estimate.v, &vec_i(t, estimate.r)?)?,
        }),
        None => None,
    };
    let mut checks = Vec::new();
    if let Some(t) = &truth_report {
        checks.push(Check::new("trace_error <= eps_tr", t.trace_error <= schedule.eps_tr));
        checks.push(Check::new("vec_error <= eps_vec", t.vec_error <= schedule.eps_vec));
    }
    let inputs = serde_json::json!({
        "state": state.display().to_string(),
        "shots": shots,
        "exact": exact,
        "truth": truth.map(|p| p.display().to_string()),
    });
    let results = TomoResults { dim: d, settings: setting_count(d), schedule, estimate, truth: truth_report };
    Report::new("tomo", Some(seed), inputs, results, checks)
}

#[derive(Serialize)]
#[serde(untagged)]
enum Run {
    Random { outcome: Box<RandomSuperpositionOutcome>, implied_phase: f64 },
    Entangled { entangled: EntangledSuperposition },
}

#[derive(Serialize)]
struct SuperposeResults {
    dim: usize,
    threshold: f64,
    floor: f64,
    n_threshold: f64,
    m_threshold: f64,
    budget: Option<Budget>,
    #[serde(flatten)]
    run: Run,
    merit: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn superpose(
    u_path: &Path,
    v_path: &Path,
    alpha: Complex64,
    beta: Complex64,
    eps: f64,
    exact: bool,
    trials: Option<usize>,
    seed: u64,
) -> Result<Report, CliError> {
    let u = load_pure(u_path)?;
    let v = load_pure(v_path)?;
    if u.dim() != v.dim() {
        return Err(CliError::validation(format!("u has dim {}, v has dim {}", u.dim(), v.dim())));
    }
    let d = u.dim();
    let spec = SuperpositionSpec::new(alpha, beta)?;
    if !(eps > 0.0 && eps < 2.0) {
        return Err(CliError::validation(format!("eps = {eps} is out of range: 0 < eps < 2")));
    }
    let (uv, vv) = (canonical_vec(&u)?, canonical_vec(&v)?);
    let stream = SeedStream::new(seed).named("superpose");
    let floor = trace_floor(&spec, d);
    let mut checks = Vec::new();
    let (run, merit, budget) = match trials {
        None => {
            let out = random_superposition(&u, &v, &spec, eps, stream, mode(exact))?;
            let merit = outcome_merit(&out, &uv, &vv, &spec)?;
            checks.push(Check::new("trace >= floor", out.trace >= floor * (1.0 - 1e-12)));
            let implied = implied_phase(&uv, &vv, &spec, out.r)?;
            let budget = out.budget.clone();
            (Run::Random { outcome: Box::new(out), implied_phase: implied }, merit, budget)
        }
        Some(trials) => {
            let ent = entangled_superposition(&u, &v, &spec, eps, stream, trials, mode(exact))?;
            let merit = entangled_merit(&ent, &uv, &vv, &spec)?;
            checks.push(Check::new("trace >= floor", ent.blocks.iter().all(|b| b.trace >= floor * (1.0 - 1e-12))));
            let budget = match mode(exact) {
                Mode::Sampled => Some(copies_budget(&spec, d, eps)?),
                Mode::Exact => copies_budget(&spec, d, eps).ok(),
            };
            (Run::Entangled { entangled: ent }, merit, budget)
        }
    };
    checks.push(Check::new("merit <= eps", merit <= eps));
    let inputs = serde_json::json!({
        "u": u_path.display().to_string(),
        "v": v_path.display().to_string(),
        "alpha": pair(alpha),
        "beta": pair(beta),
        "eps": eps,
        "exact": exact,
        "entangled": trials.is_some(),
        "trials": trials,
    });
    let results = SuperposeResults {
        dim: d,
        threshold: threshold(&spec),
        floor,
        n_threshold: n_threshold(&spec, d, eps),
        m_threshold: m_threshold(&spec, eps),
        budget,
        run,
        merit,
    };
    Report::new("superpose", Some(seed), inputs, results, checks)
}

/// Cumulative phase of `ĝ` along the loop, in turns.
fn unwrapped_turns(points: &[Complex64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = vec![0.0];
    for w in points.windows(2) {
        acc += (w[1] / w[0]).arg();
        out.push(acc / TAU);
    }
    out
}

pub fn audit(
    candidate: &str,
    alpha: Complex64,
    beta: Complex64,
    x0: Option<&Path>,
    samples: usize,
    dim: usize,
    plot_dir: Option<&Path>,
) -> Result<Report, CliError> {
    let kind: CandidateKind = candidate.parse()?;
    let spec = SuperpositionSpec::new(alpha, beta)?;
    let base = match x0 {
        Some(p) => load(p)?.as_vector().cloned().map_err(|e| CliError::input(p, e))?,
        None => StateVector::basis(2, 0),
    };
    if base.dim() != 2 {
        return Err(CliError::validation(format!("x0 must be a qubit state, got dim {}", base.dim())));
    }
    if dim < 2 {
        return Err(CliError::validation(format!("dim = {dim} must be at least 2")));
    }
    let cand = Candidate::new(kind, spec);
    let report = obstruction_audit(&cand, &spec, &base, samples, dim)?;
    if let Some(dir) = plot_dir {
        let phase = phase_loop(&base, 1, samples)?;
        write_plot(dir, "phase_loop_error.csv", &error_profile(&cand, &spec, phase.points(), dim)?)?;
        write_plot(dir, "sweep_loop_error.csv", &error_profile(&cand, &spec, &sweep_loop(&base, samples)?, dim)?)?;
        if let (n, Some(g)) = refined_phase_loop_g(&cand, &base, samples, dim)? {
            let turns = unwrapped_turns(g.points());
            let rows: Vec<(f64, f64)> = turns.iter().enumerate().map(|(j, &v)| (j as f64 / n as f64, v)).collect();
            write_plot(dir, "ghat_turns.csv", &rows)?;
        }
    }
    let checks = vec![Check::new("obstructed", report.verdict == Verdict::Obstructed)];
    let inputs = serde_json::json!({
        "candidate": kind,
        "alpha": pair(alpha),
        "beta": pair(beta),
        "x0": base.amplitudes().iter().map(|&z| pair(z)).collect::<Vec<_>>(),
        "samples": samples,
        "dim": dim,
    });
    Report::new("audit", None, inputs, report, checks)
}

/// Closed form of the probe, `√(2 + 2√(1 − ε))`.
fn probe_closed_form(eps: f64) -> f64 {
    (2.0 + 2.0 * (1.0 - eps).sqrt()).sqrt()
}

pub fn probe(eps: f64, plot_dir: Option<&Path>) -> Result<Report, CliError> {
    let value = discontinuity_probe(eps)?;
    let closed_form = probe_closed_form(eps);
    let mut checks = vec![Check::new("closed form", (value * value - closed_form * closed_form).abs() <= 1e-12)];
    if eps <= 1e-4 {
        checks.push(Check::new("value in [1.99, 2]", (1.99..=2.0).contains(&value)));
    }
    if let Some(dir) = plot_dir {
        let rows = (0..=200)
            .map(|k| {
                let e = 10f64.powf(-8.0 + 8.0 * k as f64 / 200.0).min(1.0);
                discontinuity_probe(e).map(|p| (e, p))
            })
            .collect::<supersim_core::Result<Vec<_>>>()?;
        write_plot(dir, "probe.csv", &rows)?;
    }
    let results = serde_json::json!({ "value": value, "closed_form": closed_form });
    Report::new("probe", None, serde_json::json!({ "eps": eps }), results, checks)
}

pub fn identities(samples: usize, seed: u64) -> Result<Report, CliError> {
    if samples == 0 {
        return Err(CliError::validation("samples must be positive"));
    }
    let suite = identity_suite(samples, SeedStream::new(seed).named("identities"))?;
    let checks = suite.iter().map(|c| Check::new(c.name.clone(), c.pass)).collect();
    Report::new("identities", Some(seed), serde_json::json!({ "samples": samples }), serde_json::json!({ "identities": suite }), checks)
}

pub fn table1(runs: usize, eps: f64, samples: usize, seed: u64) -> Result<Report, CliError> {
    if runs == 0 {
        return Err(CliError::validation("runs must be positive"));
    }
    let t: Table1Report = supersim_core::table1::table1(runs, eps, samples, SeedStream::new(seed).named("table1"))?;
    let checks = vec![
        Check::new("many-outcome random superposition achieved", t.multi_outcome.achieved),
        Check::new("single-outcome candidates all fail", !t.single_outcome_achieved),
    ];
    let inputs = serde_json::json!({ "runs": runs, "eps": eps, "samples": samples });
    Report::new("table1", Some(seed), inputs, t, checks)
}
