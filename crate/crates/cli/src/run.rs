use rayon::prelude::*;
use serde_json::{json, Value};

use ptspec::eigen::{converged_spectrum_with, eligible_levels, reality_report, Spectrum};
use ptspec::fock::Sector;
use ptspec::hamiltonian::{build_pt_hamiltonian, OscillatorSpec};
use ptspec::ladder::{FrequencyDecomposition, LadderPolynomial};
use ptspec::metric::{eigen_norms, eta_orthogonality_defect, physical_projector, NEAR_ZERO_NORM};
use ptspec::perturbation::{adiabatic_diagonal_order2, gml_norm_check, rs_series, MAX_NORM_ORDER};
use ptspec::verify;
use ptspec::Error;

use crate::config::{Command, RunConfig};
use crate::report::{CheckRecord, ComplexValue, Provenance, Report, SweepRow, Trace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Reality bound on `|Im E|` for converged levels.
pub const REALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    /// Table rows, for `sweep`.
    pub rows: Vec<SweepRow>,
    pub exit_code: i32,
}

struct Payload {
    results: Value,
    checks: Vec<CheckRecord>,
    traces: Vec<Trace>,
    rows: Vec<SweepRow>,
}

impl Payload {
    fn new(results: Value, checks: Vec<CheckRecord>) -> Self {
        Payload {
            results,
            checks,
            traces: Vec::new(),
            rows: Vec::new(),
        }
    }
}

pub fn execute(config: &RunConfig) -> Outcome {
    let payload = match config.command {
        Command::Spectrum => spectrum(config),
        Command::Verify => run_verify(config),
        Command::Sweep => sweep(config),
        Command::Norms => norms(config),
        Command::Algebra => algebra(config),
        Command::Perturb => perturb(config),
    };
    let (payload, failed) = match payload {
        Ok(p) => (p, false),
        Err(e) => (Payload::new(json!({ "error": failure(&e) }), Vec::new()), true),
    };
    let report = Report {
        config: config.clone(),
        results: payload.results,
        checks: payload.checks,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            traces: payload.traces,
        },
    };
    let exit_code = if failed || !report.passed() { EXIT_FAILURE } else { EXIT_OK };
    Outcome {
        report,
        rows: payload.rows,
        exit_code,
    }
}

fn failure(e: &Error) -> Value {
    let kind = match e {
        Error::SolverFailure { .. } => "solver_failure",
        Error::UndefinedSign { .. } => "undefined_sign",
        Error::InvalidSpec(_) | Error::InvalidDimension(_) | Error::InvalidTolerance(_) | Error::InvalidEpsilon(_) => {
            "invalid_input"
        }
        _ => "computation",
    };
    json!({ "kind": kind, "message": e.to_string() })
}

fn spec_json(spec: &OscillatorSpec) -> Value {
    json!({ "omega": spec.omega, "g": spec.g, "k": spec.k })
}

fn traces(s: &Spectrum) -> Vec<Trace> {
    s.levels
        .iter()
        .map(|l| Trace {
            g: s.spec.g,
            k: s.spec.k,
            level: l.index,
            dims: l.dims_used.clone(),
            values: l.values.iter().map(|&z| z.into()).collect(),
            deltas: l.deltas.clone(),
            converged: l.converged,
        })
        .collect()
}

fn levels_json(s: &Spectrum) -> Value {
    s.levels
        .iter()
        .map(|l| {
            json!({
                "index": l.index,
                "value": ComplexValue::from(l.value),
                "converged": l.converged,
                "dim": l.dims_used.last(),
            })
        })
        .collect()
}

fn max_imag(s: &Spectrum) -> Option<f64> {
    reality_report(s).ok().map(|r| r.max_imag)
}

fn convergence_check(s: &Spectrum, requested: usize) -> CheckRecord {
    let worst = s
        .levels
        .iter()
        .map(|l| l.deltas.last().copied().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let complete = s.levels.len() >= requested;
    let check = CheckRecord::new("convergence", s.all_converged() && complete, worst, s.tol);
    if !complete {
        check.with_detail(format!("only {} of {requested} levels available", s.levels.len()))
    } else if worst.is_infinite() {
        check.with_detail("a level has no successive dimensions to compare")
    } else {
        check
    }
}

fn spectrum(c: &RunConfig) -> Result<Payload, Error> {
    let spec = c.spec();
    let s = converged_spectrum_with(&spec, c.levels, c.tol, &c.dims)?;
    let checks = vec![convergence_check(&s, c.levels)];
    let results = json!({
        "spec": spec_json(&spec),
        "dims_evaluated": s.dims_evaluated,
        "final_dim": s.final_dim(),
        "levels": levels_json(&s),
        "max_imag": max_imag(&s),
    });
    let mut p = Payload::new(results, checks);
    p.traces = traces(&s);
    Ok(p)
}

fn run_verify(c: &RunConfig) -> Result<Payload, Error> {
    let report = verify::run_all(c.seed)?;
    let checks = report
        .checks
        .iter()
        .map(|o| CheckRecord::new(o.name, o.passed, o.measured, o.threshold).with_detail(o.detail.clone()))
        .collect();
    let results = json!({
        "seed": report.seed,
        "all_passed": report.all_passed(),
        "checks_run": report.checks.iter().map(|o| o.id).collect::<Vec<_>>(),
    });
    Ok(Payload::new(results, checks))
}

struct Point {
    spectrum: Spectrum,
    max_imag: Option<f64>,
    min_eta_norm: Option<f64>,
    norm_note: Option<String>,
}

fn sweep_point(c: &RunConfig, g: f64, k: u32) -> Result<Point, Error> {
    let spec = c.spec_at(g, k);
    let spectrum = converged_spectrum_with(&spec, c.levels, c.tol, &c.dims)?;
    let dim = spectrum.final_dim();
    let (min_eta_norm, norm_note) = if c.levels <= eligible_levels(dim) {
        match eigen_norms(&spec, c.levels, dim) {
            Ok(norms) => (norms.iter().map(|e| e.eta_norm.abs()).reduce(f64::min), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, Some(format!("{} levels exceed the {} eligible at N = {dim}", c.levels, eligible_levels(dim))))
    };
    Ok(Point {
        max_imag: max_imag(&spectrum),
        spectrum,
        min_eta_norm,
        norm_note,
    })
}

fn sweep(c: &RunConfig) -> Result<Payload, Error> {
    let grid: Vec<(u32, f64)> = c
        .k_grid
        .iter()
        .flat_map(|&k| c.g_grid.iter().map(move |&g| (k, g)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.jobs)
        .build()
        .map_err(|e| Error::Unsupported(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<Point, Error>> =
        pool.install(|| grid.par_iter().map(|&(k, g)| sweep_point(c, g, k)).collect());

    let mut points = Vec::new();
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    let mut traces_all = Vec::new();
    let mut unconverged = 0usize;
    for (index, (&(k, g), r)) in grid.iter().zip(results).enumerate() {
        match r {
            Ok(p) => {
                let s = &p.spectrum;
                unconverged += s.levels.iter().filter(|l| !l.converged).count() + c.levels.saturating_sub(s.levels.len());
                for l in &s.levels {
                    rows.push(SweepRow {
                        g,
                        k,
                        level: l.index,
                        energy_re: l.value.re,
                        energy_im: l.value.im,
                        converged: l.converged,
                        dim: l.dims_used.last().copied().unwrap_or(0),
                        max_imag: p.max_imag.unwrap_or(f64::NAN),
                        min_eta_norm: p.min_eta_norm,
                    });
                }
                points.push(json!({
                    "index": index,
                    "g": g,
                    "k": k,
                    "final_dim": s.final_dim(),
                    "converged": s.all_converged(),
                    "max_imag": p.max_imag,
                    "min_eta_norm": p.min_eta_norm,
                    "norm_note": p.norm_note,
                    "levels": levels_json(s),
                }));
                traces_all.extend(traces(s));
            }
            Err(e) => failures.push(json!({ "index": index, "g": g, "k": k, "error": failure(&e) })),
        }
    }
    let checks = vec![
        CheckRecord::new("points_completed", failures.is_empty(), failures.len() as f64, 0.0),
        CheckRecord::new("levels_converged", unconverged == 0, unconverged as f64, 0.0),
    ];
    let results = json!({ "points": points, "failures": failures });
    Ok(Payload {
        results,
        checks,
        traces: traces_all,
        rows,
    })
}

fn norms(c: &RunConfig) -> Result<Payload, Error> {
    let spec = c.spec();
    let s = converged_spectrum_with(&spec, c.levels, c.tol, &c.dims)?;
    let dim = s.final_dim();
    let table = eigen_norms(&spec, c.levels, dim)?;
    let orth = eta_orthogonality_defect(&table)?;

    let smallest = table.iter().map(|e| e.eta_norm.abs()).fold(f64::INFINITY, f64::min);
    let mismatched = table.iter().filter(|e| !e.sign_matches_parity()).count();
    let rows: Vec<Value> = table
        .iter()
        .enumerate()
        .map(|(i, e)| {
            json!({
                "index": i,
                "unperturbed_index": e.unperturbed_index,
                "value": ComplexValue::from(e.pair.value),
                "eta_norm": e.eta_norm,
                "intermediate_eta_norm": e.intermediate_eta_norm,
                "sign": e.sign,
                "near_zero": e.near_zero,
                "sign_matches_parity": e.sign_matches_parity(),
            })
        })
        .collect();
    let physical = if table.iter().all(|e| e.sign.is_some() && !e.near_zero) {
        let h = build_pt_hamiltonian(&spec, dim)?;
        let phys = physical_projector(&table, &h)?;
        json!({
            "unperturbed_indices": phys.unperturbed_indices,
            "min_gram_eigenvalue": phys.min_gram_eigenvalue(),
            "gram_off_diagonal": phys.gram_off_diagonal(),
            "closure_residual": phys.closure_residual,
        })
    } else {
        Value::Null
    };
    let checks = vec![
        convergence_check(&s, c.levels),
        CheckRecord::new("nonzero_norms", smallest > NEAR_ZERO_NORM, smallest, NEAR_ZERO_NORM)
            .with_detail("measured is min |eta_norm|; must exceed threshold"),
        CheckRecord::new("sign_parity", mismatched == 0, mismatched as f64, 0.0),
        CheckRecord::new("eta_orthogonality", orth.defect < 1e-8, orth.defect, 1e-8),
    ];
    let results = json!({
        "spec": spec_json(&spec),
        "dim": dim,
        "levels": rows,
        "orthogonality": { "defect": orth.defect, "checked_pairs": orth.checked, "skipped_pairs": orth.skipped },
        "physical_subspace": physical,
    });
    let mut p = Payload::new(results, checks);
    p.traces = traces(&s);
    Ok(p)
}

fn algebra(c: &RunConfig) -> Result<Payload, Error> {
    let mut checks = Vec::new();
    let mut commutators = serde_json::Map::new();
    for (sector, label) in [(Sector::Standard, "[a, a†]"), (Sector::Tilde, "[b, b̄]")] {
        let a = LadderPolynomial::annihilation(sector);
        let comm = a.commutator(&LadderPolynomial::creation(sector))?;
        let exact = comm == LadderPolynomial::one(sector);
        checks.push(CheckRecord::new(format!("commutator {label}"), exact, if exact { 0.0 } else { 1.0 }, 0.0));
        commutators.insert(label.to_string(), Value::String(comm.to_string()));
    }

    let x = LadderPolynomial::position(Sector::Standard);
    let p = LadderPolynomial::momentum(Sector::Standard);
    let xt = LadderPolynomial::position(Sector::Tilde);
    let pt = LadderPolynomial::momentum(Sector::Tilde);
    let standard = LadderPolynomial::interaction(c.k, Sector::Standard);
    let tilde = LadderPolynomial::interaction(c.k, Sector::Tilde);
    let forms = json!({
        "x": x.to_string(),
        "p": p.to_string(),
        "x^2 + p^2": x.multiply(&x)?.add(&p.multiply(&p)?)?.to_string(),
        "x~": xt.to_string(),
        "p~": pt.to_string(),
        "x~^2 + p~^2": xt.multiply(&xt)?.add(&pt.multiply(&pt)?)?.to_string(),
        "interaction": standard.to_string(),
        "interaction~": tilde.to_string(),
    });

    let decomposition = tilde.interaction_picture();
    let spacing = FrequencyDecomposition::level_spacing(c.omega);
    let components: Vec<Value> = decomposition
        .components
        .iter()
        .map(|comp| {
            json!({
                "net_degree": comp.net_degree,
                "frequency": comp.frequency(spacing),
                "term": comp.poly.to_string(),
            })
        })
        .collect();
    let mut products = Vec::new();
    let mut all_number = true;
    for d in decomposition.net_degrees().into_iter().filter(|&d| d > 0) {
        let (Some(up), Some(down)) = (decomposition.component(d), decomposition.component(-d)) else {
            continue;
        };
        let product = up.multiply(down)?;
        let number = product.as_number_polynomial();
        all_number &= number.is_some();
        products.push(json!({
            "pair": [d, -d],
            "product": product.to_string(),
            "number_polynomial": number.map(|cs| cs.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
        }));
    }
    checks.push(CheckRecord::new(
        "number_operator_structure",
        all_number,
        if all_number { 0.0 } else { 1.0 },
        0.0,
    ));
    let results = json!({
        "k": c.k,
        "commutators": commutators,
        "normal_ordered": forms,
        "frequency_decomposition": { "level_spacing": spacing, "components": components },
        "paired_products": products,
    });
    Ok(Payload::new(results, checks))
}

fn perturb(c: &RunConfig) -> Result<Payload, Error> {
    let spec = c.spec();
    let g2 = spec.g * spec.g;
    let norm_order = c.order.min(MAX_NORM_ORDER);
    let mut levels = Vec::new();
    let mut pole_gap: f64 = 0.0;
    let mut sign_mismatch = 0usize;
    for n in 0..c.levels {
        let series = rs_series(&spec, n, c.order)?;
        let adiabatic = if spec.is_odd() && c.order >= 2 {
            let a = adiabatic_diagonal_order2(&spec, n, c.epsilon)?;
            let e2 = series.energy_coeffs[2] * g2;
            pole_gap = pole_gap
                .max(a.pole_coeff.re.abs())
                .max((a.pole_coeff.im + e2 / 2.0).abs());
            json!({
                "epsilon": a.epsilon,
                "amplitude": ComplexValue::from(a.amplitude),
                "pole_coeff": ComplexValue::from(a.pole_coeff),
                "finite_part": ComplexValue::from(a.finite_part),
            })
        } else {
            Value::Null
        };
        let norm = gml_norm_check(&spec, n, norm_order)?;
        if spec.g != 0.0 && !norm.sign_consistent {
            sign_mismatch += 1;
        }
        levels.push(json!({
            "level": n,
            "energy_coeffs_exact": series.energy_exact.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "energy_coeffs": series.energy_coeffs,
            "energy_at_g": series.energy_at(spec.g),
            "adiabatic_order2": adiabatic,
            "norm_series": {
                "order": norm_order,
                "coeffs_exact": norm.coeffs.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                "value_at_g": norm.value,
                "sign_prediction": norm.sign_prediction,
                "sign_consistent": norm.sign_consistent,
            },
        }));
    }
    let mut checks = vec![CheckRecord::new("norm_sign", sign_mismatch == 0, sign_mismatch as f64, 0.0)];
    if spec.is_odd() && c.order >= 2 {
        checks.push(CheckRecord::new("pole_energy_link", pole_gap <= 1e-12, pole_gap, 1e-12));
    }
    let results = json!({ "spec": spec_json(&spec), "order": c.order, "levels": levels });
    Ok(Payload::new(results, checks))
}
