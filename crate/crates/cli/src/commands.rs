use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use calr3d_core::analysis::{
    classify_sweep, critical_radius_probe, gap_check, sweep_point, Outcome, Regime, SweepResult, WindowStats,
};
use calr3d_core::spectral::solve;
use calr3d_core::{Error, LemmaPolynomial, SourceKind, Vec3};

use crate::config::{LemmaConfig, OutputConfig, Plane, RunConfig};
use crate::error::{CliError, EXIT_NUMERICAL, EXIT_USAGE};
use crate::output::{csv, num, write_atomic};

pub const SWEEP_HEADER: [&str; 5] = ["delta", "E_exact", "E_approx", "N_used", "N_delta"];
pub const FIELD_HEADER: [&str; 6] = ["x", "y", "z", "region", "V_re", "V_im"];
pub const MODES_HEADER: [&str; 10] = ["n", "ln_p", "a_re", "a_im", "b_re", "b_im", "c_re", "c_im", "d_re", "d_im"];
pub const LEMMA_HEADER: [&str; 6] = ["n", "draw", "residual", "sampled_sup", "bound", "pass"];

/// What a command produced.
#[derive(Debug, Default)]
pub struct Emitted {
    /// Main document (CSV or JSON).
    pub primary: String,
    /// `(suffix, contents)` written beside the main output.
    pub sidecars: Vec<(&'static str, String)>,
    /// Exit status (0 unless the command reports a failure in-band).
    pub status: i32,
}

fn effective(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Emitted, CliError> {
    let geom = cfg.geometry()?;
    let mat = cfg.single_material()?;
    let src = cfg.source()?;
    let sol = solve(&geom, &mat, &src, cfg.solve_options()?)?;
    if let Some(path) = &cfg.output.modes_path {
        let rows = sol.modes().iter().map(|m| {
            let mut r = vec![m.n().to_string(), num(m.ln_p())];
            for z in [m.a(), m.b(), m.c(), m.d()] {
                r.push(num(z.re));
                r.push(num(z.im));
            }
            r
        });
        write_atomic(std::path::Path::new(path), csv(&MODES_HEADER, rows).as_bytes())?;
    }
    let doc = json!({
        "command": "solve",
        "E_exact": sol.energy_exact(),
        "E_approx": sol.energy_approx(),
        "ln_E_exact": sol.ln_energy_exact(),
        "N_used": sol.n_used(),
        "N_delta": sol.n_delta(),
        "converged": sol.converged(),
        "cap": sol.cap(),
        "effective_config": effective(cfg),
    });
    Ok(Emitted { primary: pretty(&doc), ..Default::default() })
}

fn parallel_sweep(cfg: &RunConfig, grid: &[f64]) -> Result<SweepResult, CliError> {
    let geom = cfg.geometry()?;
    let family = cfg.family()?;
    let src = cfg.source()?;
    let opts = cfg.solve_options()?;
    calr3d_core::analysis::check_grid(grid).map_err(|e| CliError::Config(format!("materials.delta_grid: {e}")))?;
    let rows = grid.par_iter().map(|&d| sweep_point(&geom, family, &src, d, opts)).collect();
    Ok(SweepResult::from_rows(rows)?)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Emitted, CliError> {
    let grid = cfg.delta_grid()?;
    let result = parallel_sweep(cfg, &grid)?;
    let mut failures = Vec::new();
    let rows: Vec<Vec<String>> = result
        .rows()
        .iter()
        .map(|r| match &r.outcome {
            Ok(p) => vec![num(r.delta), num(p.e_exact), num(p.e_approx), p.n_used.to_string(), num(r.n_delta)],
            Err(e) => {
                failures.push(json!({"delta": r.delta, "error": e.to_string()}));
                vec![num(r.delta), num(f64::NAN), num(f64::NAN), String::new(), num(r.n_delta)]
            }
        })
        .collect();
    let meta = json!({
        "command": "sweep",
        "rows": rows.len(),
        "failures": failures,
        "effective_config": effective(cfg),
    });
    Ok(Emitted { primary: csv(&SWEEP_HEADER, rows), sidecars: vec![("meta.json", pretty(&meta))], status: 0 })
}

fn window_json(w: &WindowStats) -> Value {
    json!({
        "complete": w.complete,
        "points": w.points,
        "decades": w.decades,
        "strictly_increasing": w.strictly_increasing,
        "growth_per_decade": w.growth_per_decade,
        "rise": w.rise,
        "variation": w.variation,
        "E_start": w.e_start,
        "E_end": w.e_end,
    })
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<Emitted, CliError> {
    let geom = cfg.geometry()?;
    let src = cfg.source()?;
    let opts = cfg.solve_options()?;
    let detector = cfg.detector()?;
    let grid = calr3d_core::analysis::canonical_grid(&geom, opts.n_max.min(src.n_max()));
    if grid.is_empty() {
        return Err(CliError::Config("numerics.n_max: too small for a canonical grid (need >= 23)".into()));
    }
    let result = parallel_sweep(cfg, &grid)?;
    let (eps_c, eps_s) = (cfg.materials.eps_c, cfg.materials.eps_s);
    let regime = Regime::determine(&geom, eps_c, eps_s, src.support_radius());
    let verdict = classify_sweep(&result, regime, &detector);

    let cond = cfg.gap_condition();
    let gap = gap_check(&src, &geom, cond, cfg.classify.gap_sequence.as_deref())?;

    let mut status = match verdict.outcome {
        Outcome::Inconclusive => "inconclusive",
        _ => "ok",
    };
    let mut code = 0;
    let mut critical = Value::Null;
    if cfg.classify.critical_radius {
        let dir = Vec3::from_array(cfg.classify.direction);
        match critical_radius_probe(&geom, eps_c, eps_s, dir, cfg.classify.tolerance, opts, &detector) {
            Ok(c) => {
                critical = json!({
                    "estimate": c.estimate(),
                    "lower": c.lower,
                    "upper": c.upper,
                    "evaluations": c.evaluations,
                });
            }
            Err(Error::NoCriticalRadius(_)) => {
                status = "no critical radius";
                code = EXIT_USAGE;
            }
            Err(e @ Error::Bisection(_)) => {
                status = "bisection failed";
                critical = json!({ "error": e.to_string() });
                code = EXIT_NUMERICAL;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let doc = json!({
        "command": "classify",
        "status": status,
        "regime": regime.label(),
        "outcome": verdict.outcome.label(),
        "blow_up": verdict.blow_up(),
        "growth_exponent": verdict.growth_exponent,
        "critical_radius_estimate": critical,
        "gap_condition": cond.label(),
        "gap_verdict": gap.verdict.label(),
        "evidence": {
            "points": verdict.points,
            "failures": verdict.failures,
            "delta_min": grid.last(),
            "growth_window": window_json(&verdict.evidence),
            "plateau_window": window_json(&verdict.plateau),
        },
        "effective_config": effective(cfg),
    });
    Ok(Emitted { primary: pretty(&doc), sidecars: Vec::new(), status: code })
}

fn plane_point(plane: Plane, u: f64, v: f64, w: f64) -> Vec3 {
    match plane {
        Plane::Xy => Vec3::new(u, v, w),
        Plane::Xz => Vec3::new(u, w, v),
        Plane::Yz => Vec3::new(w, u, v),
    }
}

pub fn cmd_field(cfg: &RunConfig) -> Result<Emitted, CliError> {
    let geom = cfg.geometry()?;
    let mat = cfg.single_material()?;
    let src = cfg.source()?;
    let sol = solve(&geom, &mat, &src, cfg.solve_options()?)?;
    let f = cfg.field;
    let res = f.resolution;
    let coord = |i: usize| -f.extent + 2.0 * f.extent * i as f64 / (res - 1) as f64;
    let singular = match *src.kind() {
        SourceKind::Dipole { position, .. } | SourceKind::Quadrupole { position, .. } => Some(position),
        SourceKind::Raw { .. } => None,
    };
    let skip = |x: Vec3| {
        let r = x.norm();
        (r - geom.r_i()).abs() <= f.skip_distance
            || (r - geom.r_e()).abs() <= f.skip_distance
            || geom.on_interface(x)
            || singular.is_some_and(|p| (x - p).norm() <= f.skip_distance)
    };
    let cells: Vec<Result<Option<(Vec<String>, bool)>, CliError>> = (0..res * res)
        .into_par_iter()
        .map(|idx| {
            let (j, i) = (idx / res, idx % res);
            let x = plane_point(f.plane, coord(i), coord(j), f.offset);
            if skip(x) {
                return Ok(None);
            }
            let v = sol.eval_potential(x)?;
            let row = vec![
                num(x.x),
                num(x.y),
                num(x.z),
                geom.classify(x).name().to_string(),
                num(v.value.re),
                num(v.value.im),
            ];
            Ok(Some((row, v.converged)))
        })
        .collect();
    let mut rows = Vec::with_capacity(cells.len());
    let (mut skipped, mut unconverged) = (0usize, 0usize);
    for c in cells {
        match c? {
            Some((row, conv)) => {
                if !conv {
                    unconverged += 1;
                }
                rows.push(row);
            }
            None => skipped += 1,
        }
    }
    let meta = json!({
        "command": "field",
        "points": res * res,
        "skipped": skipped,
        "unconverged": unconverged,
        "effective_config": effective(cfg),
    });
    Ok(Emitted { primary: csv(&FIELD_HEADER, rows), sidecars: vec![("meta.json", pretty(&meta))], status: 0 })
}

/// Configuration accepted by `lemma-check`: only the `lemma` and `output`
/// sections matter, other sections of a full run config are ignored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LemmaRun {
    #[serde(default)]
    pub lemma: LemmaConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl LemmaRun {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let run: LemmaRun = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if run.lemma.degrees.contains(&0) {
            return Err(CliError::Config("lemma.degrees: degrees must be >= 1".into()));
        }
        if run.lemma.samples == 0 {
            return Err(CliError::Config("lemma.samples: must be positive".into()));
        }
        Ok(run)
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let r = v.norm();
        if r > 0.1 && r <= 1.0 {
            return v * (1.0 / r);
        }
    }
}

/// Residual tolerance for `â·∇h(ŷ) = 1`.
pub const LEMMA_RESIDUAL_TOL: f64 = 1e-10;

pub fn cmd_lemma_check(run: &LemmaRun, seed: u64) -> Result<Emitted, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = &run.lemma;
    let mut draws = Vec::new();
    for &n in &cfg.degrees {
        for d in 0..cfg.draws {
            draws.push((n, d, random_unit(&mut rng), random_unit(&mut rng)));
        }
    }
    let rows: Vec<Result<(Vec<String>, bool), CliError>> = draws
        .par_iter()
        .map(|&(n, d, y, a)| {
            let h = LemmaPolynomial::new(n, y, a)?;
            let residual = (h.directional_derivative(y, a) - 1.0).abs();
            let sup = h.sampled_sup(cfg.samples);
            let bound = 3f64.sqrt() / n as f64;
            let pass = residual <= LEMMA_RESIDUAL_TOL && sup <= bound;
            Ok((vec![n.to_string(), d.to_string(), num(residual), num(sup), num(bound), pass.to_string()], pass))
        })
        .collect();
    let mut out = Vec::with_capacity(rows.len());
    let mut failed = 0;
    for r in rows {
        let (row, pass) = r?;
        if !pass {
            failed += 1;
        }
        out.push(row);
    }
    let meta = json!({
        "command": "lemma-check",
        "seed": seed,
        "checks": out.len(),
        "failed": failed,
        "effective_config": serde_json::to_value(run).expect("config serializes"),
    });
    Ok(Emitted { primary: csv(&LEMMA_HEADER, out), sidecars: vec![("meta.json", pretty(&meta))], status: 0 })
}
