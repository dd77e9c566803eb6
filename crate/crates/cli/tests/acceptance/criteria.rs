use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use calr3d_core::analysis::{
    boundedness_probe, classify_sweep, critical_radius_probe, gap_check, local_energy, sweep,
    DetectorConfig, GapCondition, LocalQuadrature, MaterialFamily, Outcome, Regime, RegionSpec, SweepResult,
};
use calr3d_core::harmonics::{eval_solid_harmonic, grad_solid_harmonic, make_quadrature, Derivatives, HarmonicTable};
use calr3d_core::spectral::{mode_coefficients_closed, mode_coefficients_oracle, solve};
use calr3d_core::{
    FoldedGeometry, HarmonicIndex, LemmaPolynomial, MaterialParams, MultipoleSource, SolidKind, SolveOptions,
    Vec3,
};

use crate::{check, Check};

fn g124() -> FoldedGeometry {
    FoldedGeometry::derive(1.0, 2.0, 4.0).unwrap()
}

fn rho_grid(g: &FoldedGeometry, from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| g.rho().powi(k)).collect()
}

fn radial_dipole(r: f64, n_max: usize) -> MultipoleSource {
    MultipoleSource::dipole(Vec3::E3, Vec3::E3 * r, n_max).unwrap()
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

fn random_geometry(rng: &mut ChaCha8Rng) -> FoldedGeometry {
    let r_i = rng.gen_range(0.5..1.5);
    let r_e = r_i * rng.gen_range(1.1..2.5);
    let r_0 = r_e * rng.gen_range(1.1..3.0);
    FoldedGeometry::derive(r_i, r_e, r_0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// Sweep `δ = ρ^k`, `k = 3..=24`, for a radial dipole.
fn short_sweep(eps_c: f64, eps_s: f64, r: f64) -> SweepResult {
    let g = g124();
    let fam = MaterialFamily::new(eps_c, eps_s).unwrap();
    sweep(&g, fam, &radial_dipole(r, 200), &rho_grid(&g, 3, 24), SolveOptions::default()).unwrap()
}

pub fn c01_coefficient_oracle() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_rel, mut worst_res, mut errors) = (0.0_f64, 0.0_f64, 0);
    let draws = 200;
    for _ in 0..draws {
        let g = random_geometry(&mut rng);
        let eps_c = rng.gen_range(0.1..5.0);
        let eps_s = if rng.gen_bool(0.25) { -1.0 } else { -rng.gen_range(0.1..5.0) };
        let delta = 10f64.powf(rng.gen_range(-9.0..0.0));
        let mat = MaterialParams::new(eps_c, eps_s, delta).unwrap();
        for n in 0..=100 {
            match (mode_coefficients_closed(&g, &mat, n), mode_coefficients_oracle(&g, &mat, n)) {
                (Ok(c), Ok(o)) => {
                    worst_rel = worst_rel.max(c.max_rel_diff(&o));
                    worst_res = worst_res.max(c.interface_residuals(&mat).into_iter().fold(0.0, f64::max));
                }
                _ => errors += 1,
            }
        }
    }
    vec![
        check("closed vs 4x4 solve rel err <= 1e-9", worst_rel <= 1e-9 && errors == 0, format!("{draws} draws, n<=100, max {worst_rel:.2e}, {errors} solver errors")),
        check("interface residuals <= 1e-10", worst_res <= 1e-10, format!("max {worst_res:.2e}")),
    ]
}

pub fn c02_tensor_pushforward() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_t = 0.0_f64;
    for _ in 0..100 {
        let g = random_geometry(&mut rng);
        let mat = MaterialParams::new(rng.gen_range(0.1..5.0), -rng.gen_range(0.1..5.0), 10f64.powf(rng.gen_range(-9.0..0.0)))
            .unwrap();
        let s = rng.gen_range(g.r_i() * 1.0001..g.r_e() * 0.9999);
        let x = random_unit(&mut rng) * s;
        let closed = g.permittivity_tensor(&mat, x).unwrap();
        let pushed = g.pushforward_tensor(&mat, x).unwrap();
        worst_t = worst_t.max(closed.max_abs_diff(&pushed) / closed.max_abs());
    }
    let mut worst_rt = 0.0_f64;
    for _ in 0..300 {
        let g = random_geometry(&mut rng);
        let s = rng.gen_range(0.01..2.0 * g.r_0());
        let x = random_unit(&mut rng) * s;
        if g.on_interface(x) {
            continue;
        }
        let (region, y) = g.fold(x).unwrap();
        let back = g.unfold(region, y).unwrap();
        worst_rt = worst_rt.max((back - x).norm() / x.norm());
        let again = g.fold(back).unwrap().1;
        worst_rt = worst_rt.max((again - y).norm() / y.norm());
    }
    vec![
        check("closed-form tensor = push-forward (rel 1e-12)", worst_t <= 1e-12, format!("100 shell points, max {worst_t:.2e}")),
        check("fold/unfold round trip (rel 1e-14)", worst_rt <= 1e-14, format!("max {worst_rt:.2e}")),
    ]
}

pub fn c03_energy_oracle() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut w20, mut w5, mut w5q) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..20 {
        let g = random_geometry(&mut rng);
        let eps_s = if rng.gen_bool(0.3) { -1.0 } else { -rng.gen_range(0.3..3.0) };
        let mat = MaterialParams::new(rng.gen_range(0.3..3.0), eps_s, 10f64.powf(rng.gen_range(-3.0..0.0))).unwrap();
        let pos = random_unit(&mut rng) * (g.r_e() * rng.gen_range(1.1..2.0));
        let src = MultipoleSource::dipole(random_unit(&mut rng), pos, 40).unwrap();
        let sol = solve(&g, &mat, &src, SolveOptions::default()).unwrap();
        w20 = w20.max(rel(sol.energy_exact_upto(20), sol.energy_quadrature(20)));
        let phys = sol.energy_physical(5).unwrap();
        w5 = w5.max(rel(sol.energy_exact_upto(5), phys));
        w5q = w5q.max(rel(sol.energy_quadrature(5), phys));
    }
    vec![
        check("series = folded quadrature at N=20 (rel 1e-6)", w20 <= 1e-6, format!("20 configs, max {w20:.2e}")),
        check("series = physical Im∫ε∇V·∇V̄ at N=5 (rel 1e-5)", w5 <= 1e-5, format!("max {w5:.2e}")),
        check("folded quadrature = physical at N=5 (rel 1e-5)", w5q <= 1e-5, format!("max {w5q:.2e}")),
    ]
}

fn verdict_check(name: &str, v: &calr3d_core::analysis::CalrVerdict, want: Outcome) -> Check {
    check(
        name,
        v.outcome == want,
        format!(
            "{}, growth/decade {:.3}, variation {:.3}, rise {:.3}",
            v.outcome.label(),
            v.evidence.growth_per_decade,
            v.plateau.variation,
            v.plateau.rise
        ),
    )
}

pub fn c04_case_i() -> Vec<Check> {
    let fixed = DetectorConfig::fixed_thresholds();
    let default = DetectorConfig::default();
    let inside = short_sweep(1.0, -1.0, 2.4);
    let outside = short_sweep(1.0, -1.0, 3.5);
    vec![
        verdict_check("|y|=2.4: >=10x/decade over final 3 decades", &classify_sweep(&inside, Regime::CaseI, &fixed), Outcome::BlowUp),
        verdict_check("|y|=3.5: variation <5% over final 2 decades", &classify_sweep(&outside, Regime::OutsideCritical, &fixed), Outcome::Bounded),
        verdict_check("|y|=2.4: monotone growth (default detector)", &classify_sweep(&inside, Regime::CaseI, &default), Outcome::BlowUp),
        verdict_check("|y|=3.5: no rise (default detector)", &classify_sweep(&outside, Regime::OutsideCritical, &default), Outcome::Bounded),
    ]
}

pub fn c05_case_ii() -> Vec<Check> {
    let g = g124();
    let fixed = DetectorConfig::fixed_thresholds();
    let default = DetectorConfig::default();
    let opts = SolveOptions::default();
    let inside = short_sweep(2.0, -1.0, 3.5);
    let outside = short_sweep(2.0, -1.0, 4.5);
    let mut out = vec![
        verdict_check("|y|=3.5 blows up (fixed thresholds)", &classify_sweep(&inside, Regime::CaseII, &fixed), Outcome::BlowUp),
        verdict_check("|y|=4.5 bounded (fixed thresholds)", &classify_sweep(&outside, Regime::OutsideCritical, &fixed), Outcome::Bounded),
        verdict_check("|y|=3.5 blows up (default detector)", &classify_sweep(&inside, Regime::CaseII, &default), Outcome::BlowUp),
        verdict_check("|y|=4.5 bounded (default detector)", &classify_sweep(&outside, Regime::OutsideCritical, &default), Outcome::Bounded),
    ];
    for (label, eps_c, target) in [("r_** = 4", 2.0, g.r_dstar()), ("r_* = 2.8284", 1.0, g.r_star())] {
        let c = match critical_radius_probe(&g, eps_c, -1.0, Vec3::E3, 0.02, opts, &default) {
            Ok(c) => check(
                format!("bisection recovers {label} within 2%"),
                rel(c.estimate(), target) <= 0.02,
                format!("[{:.4}, {:.4}], {} evaluations", c.lower, c.upper, c.evaluations),
            ),
            Err(e) => check(format!("bisection recovers {label} within 2%"), false, e.to_string()),
        };
        out.push(c);
    }
    out
}

pub fn c06_case_iii() -> Vec<Check> {
    let g = g124();
    let fixed = DetectorConfig::fixed_thresholds();
    let default = DetectorConfig::default();
    let (mut fixed_ok, mut default_ok, mut total) = (0, 0, 0);
    let mut worst_fixed = 0.0_f64;
    let mut worst_ratio = 0.0_f64;
    let mut late_ratio = 0.0_f64;
    let grid = rho_grid(&g, 3, 24);
    for eps_s in [-0.5, -2.0, -3.0] {
        for eps_c in [1.0, 2.0] {
            for r in [2.4, 3.5] {
                let res = short_sweep(eps_c, eps_s, r);
                total += 1;
                let vf = classify_sweep(&res, Regime::CaseIII, &fixed);
                worst_fixed = worst_fixed.max(vf.plateau.variation);
                fixed_ok += (vf.outcome == Outcome::Bounded) as usize;
                default_ok += (classify_sweep(&res, Regime::CaseIII, &default).outcome == Outcome::Bounded) as usize;
                let src = radial_dipole(r, 200);
                for (i, &d) in grid.iter().enumerate() {
                    let mat = MaterialParams::new(eps_c, eps_s, d).unwrap();
                    let sol = solve(&g, &mat, &src, SolveOptions::default()).unwrap();
                    for n in 1..=sol.n_used() {
                        let bound = (n as f64).ln() + 2.0 * n as f64 * g.r_e().ln() + src.ln_power(n);
                        let ratio = (sol.ln_mode_energy(n) - bound).exp();
                        worst_ratio = worst_ratio.max(ratio);
                        if i >= grid.len() / 2 {
                            late_ratio = late_ratio.max(ratio);
                        }
                    }
                }
            }
        }
    }
    vec![
        check("all sweeps bounded (fixed thresholds)", fixed_ok == total, format!("{fixed_ok}/{total}, worst variation {worst_fixed:.3}")),
        check("all sweeps bounded (default detector)", default_ok == total, format!("{default_ok}/{total}")),
        check(
            "summand <= n r_e^{2n} |f_n|^2 for all delta",
            worst_ratio <= 1.0,
            format!("max ratio {worst_ratio:.3}, max over smaller half of delta {late_ratio:.3e}"),
        ),
    ]
}

pub fn c07_boundedness() -> Vec<Check> {
    let g = g124();
    let fam = MaterialFamily::new(1.0, -1.0).unwrap();
    let src = MultipoleSource::dipole(Vec3::new(0.0, 0.6, 0.8), Vec3::E3 * 2.4, 200).unwrap();
    let grid = rho_grid(&g, 3, 20);
    let radius = 1.1 * g.far_bound();
    let rep = boundedness_probe(&g, fam, &src, radius, &grid, 50, SolveOptions::default()).unwrap();
    let quad = LocalQuadrature::default();
    let near = RegionSpec::Annulus { inner: 1.2, outer: 1.8 };
    let mut energies = Vec::new();
    for k in [4, 8, 12, 16, 20] {
        let mat = fam.at(g.rho().powi(k)).unwrap();
        let sol = solve(&g, &mat, &src, SolveOptions::default()).unwrap();
        energies.push(local_energy(&sol, near, quad).unwrap());
    }
    let grows = energies.windows(2).all(|w| w[1] > w[0]);
    vec![
        check(
            "sup |V| <= majorant + |F| at 1.1 r_0^2/r_e",
            rep.within_majorant() && rep.majorant.converges,
            format!(
                "sup |V| {:.4e}, majorant {:.4e}, sup |F| {:.4e}, ratio {:.3}",
                rep.sup_potential, rep.majorant.value, rep.sup_source, rep.majorant.ratio
            ),
        ),
        check(
            "near-shell local energy grows as delta -> 0",
            grows && energies[4] > 10.0 * energies[0],
            format!("E0 at rho^4..rho^20: {}", energies.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")),
        ),
    ]
}

pub fn c08_lemma() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst_res, mut worst_sup, mut count) = (0.0_f64, f64::NEG_INFINITY, 0);
    for n in [1, 2, 5, 10, 25, 50] {
        for _ in 0..20 {
            let y = random_unit(&mut rng);
            let a = random_unit(&mut rng);
            let h = LemmaPolynomial::new(n, y, a).unwrap();
            worst_res = worst_res.max((h.directional_derivative(y, a) - 1.0).abs());
            worst_sup = worst_sup.max(h.sampled_sup(10_000) * n as f64 / 3f64.sqrt());
            count += 1;
        }
    }
    vec![
        check("a.grad h(y) = 1 within 1e-10", worst_res <= 1e-10, format!("{count} draws, max residual {worst_res:.2e}")),
        check("sampled sup <= sqrt(3)/n", worst_sup <= 1.0, format!("max sup / (sqrt3/n) = {worst_sup:.4}")),
    ]
}

pub fn c09_gap() -> Vec<Check> {
    let g = g124();
    let dir = Vec3::new(0.48, -0.6, 0.64);
    let moment = Vec3::new(0.3, 0.5, -0.81).unit().unwrap();
    let mut out = Vec::new();
    for frac in [0.85, 0.95] {
        let r = frac * g.r_star();
        let src = MultipoleSource::dipole(moment, dir * r, 80).unwrap();
        let d = gap_check(&src, &g, GapCondition::Gc1, None).unwrap();
        let q = d.summand_rate(5, 80);
        let want = (g.r_star() / r).powi(2);
        out.push(check(
            format!("|y|/r_*={frac}: S_n rate = (r_*/|y|)^2 within 10%"),
            rel(q, want) <= 0.1,
            format!("fitted {q:.4}, expected {want:.4}, verdict {}", d.verdict.label()),
        ));
        let cs: Vec<f64> = (5..=80).map(|n| (src.ln_max_abs(n) + (n as f64).ln() + (n as f64 + 1.0) * r.ln()).exp()).collect();
        let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &c| (a.min(c), b.max(c)));
        out.push(check(
            format!("|y|/r_*={frac}: C in max|f_n| >= C/(n|y|^(n+1)) spread < 10x"),
            hi / lo < 10.0,
            format!("C in [{lo:.3}, {hi:.3}], spread {:.2}", hi / lo),
        ));
    }
    out
}

/// `(min, max)` of the corridor ratios over `n = 1..=100` and the loss grid.
fn corridor(eps_c: f64, eps_s: f64, b_den: impl Fn(f64, f64) -> f64, c_num: impl Fn(f64) -> f64) -> ((f64, f64), (f64, f64)) {
    let g = g124();
    let rho = g.rho();
    let mut b_rng = (f64::INFINITY, 0.0_f64);
    let mut c_rng = (f64::INFINITY, 0.0_f64);
    for e in 2..=9 {
        let delta = 10f64.powi(-e);
        let mat = MaterialParams::new(eps_c, eps_s, delta).unwrap();
        for n in 1..=100 {
            let m = mode_coefficients_closed(&g, &mat, n).unwrap();
            let (ln_b, ln_c) = m.ln_abs_b_c(&g);
            let r2n = rho.powi(2 * n as i32);
            let den = b_den(delta, r2n);
            let rb = (ln_b + den.ln() - r2n.ln()).exp();
            let rc = (ln_c + den.ln() - c_num(delta).ln() - 2.0 * n as f64 * g.r_e().ln()).exp();
            b_rng = (b_rng.0.min(rb), b_rng.1.max(rb));
            c_rng = (c_rng.0.min(rc), c_rng.1.max(rc));
        }
    }
    (b_rng, c_rng)
}

pub fn c10_corridors() -> Vec<Check> {
    // frozen corridor for every case
    let (c1, c2) = (0.125, 8.0);
    let inside = |r: (f64, f64)| r.0 >= c1 && r.1 <= c2;
    let fmt = |r: (f64, f64)| format!("[{:.3e}, {:.3e}]", r.0, r.1);
    let (bi, ci) = corridor(1.0, -1.0, |d, r| d * d + r, |d| d);
    let (bii, cii) = corridor(2.0, -1.0, |d, r| d + r, |_| 1.0);
    let (biii, ciii) = corridor(1.0, -2.0, |d, r| d + r, |d| d);
    vec![
        check("case (i) |b_n|(d^2+rho^2n)/rho^2n", inside(bi), fmt(bi)),
        check("case (i) |c_n|(d^2+rho^2n)/(d r_e^2n)", inside(ci), fmt(ci)),
        check("case (ii) |b_n|(d+rho^2n)/rho^2n", inside(bii), fmt(bii)),
        check("case (ii) |c_n|(d+rho^2n)/r_e^2n", inside(cii), fmt(cii)),
        check("case (iii) |b_n|(d+rho^2n)/rho^2n", inside(biii), fmt(biii)),
        check("case (iii) |c_n|(d+rho^2n)/(d r_e^2n)", inside(ciii), fmt(ciii)),
    ]
}

fn legendre(n: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return 1.0;
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * t * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

pub fn c11_harmonics() -> Vec<Check> {
    let n_top = 25;
    let len = (n_top + 1) * (n_top + 1);
    let rule = make_quadrature(2 * n_top);
    let mut gram = vec![0.0; len * len];
    for (u, w) in rule.iter() {
        let t = HarmonicTable::new(u, n_top, Derivatives::None);
        let v = t.values();
        for i in 0..len {
            let wi = w * v[i];
            for j in i..len {
                gram[i * len + j] += wi * v[j];
            }
        }
    }
    let mut ortho = 0.0_f64;
    for i in 0..len {
        for j in i..len {
            ortho = ortho.max((gram[i * len + j] - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut addition = 0.0_f64;
    for _ in 0..50 {
        let (u, v) = (random_unit(&mut rng), random_unit(&mut rng));
        let (tu, tv) = (HarmonicTable::new(u, n_top, Derivatives::None), HarmonicTable::new(v, n_top, Derivatives::None));
        for n in 0..=n_top {
            let s: f64 = (-(n as i64)..=n as i64).map(|k| tu.value(n, k) * tv.value(n, k)).sum();
            let want = (2 * n + 1) as f64 / (4.0 * std::f64::consts::PI) * legendre(n, u.dot(v));
            addition = addition.max((s - want).abs());
        }
    }

    // fourth-order central differences, step scaled to the variation length
    let mut fd = 0.0_f64;
    for _ in 0..40 {
        let x = random_unit(&mut rng) * rng.gen_range(0.5..1.5);
        for n in 0..=10 {
            for k in -(n as i64)..=n as i64 {
                let idx = HarmonicIndex::new(n, k).unwrap();
                let h = 2e-3 * x.norm() / (n + 1) as f64;
                for kind in [SolidKind::Regular, SolidKind::Irregular] {
                    let g = grad_solid_harmonic(idx, x, kind).unwrap();
                    let f = |p: Vec3| eval_solid_harmonic(idx, p, kind).unwrap();
                    let d = |e: Vec3| {
                        (8.0 * (f(x + e * h) - f(x - e * h)) - (f(x + e * (2.0 * h)) - f(x - e * (2.0 * h)))) / (12.0 * h)
                    };
                    let num = Vec3::new(d(Vec3::E1), d(Vec3::E2), d(Vec3::E3));
                    fd = fd.max((g - num).norm() / g.norm().max(1.0));
                }
            }
        }
    }

    let y = Vec3::new(1.0, -2.0, 2.0);
    let src = MultipoleSource::dipole(Vec3::new(0.2, 0.7, -0.4), y, 80).unwrap();
    let mut green = 0.0_f64;
    for _ in 0..50 {
        let x = random_unit(&mut rng) * rng.gen_range(0.2..2.0);
        let direct = src.potential(x).unwrap();
        let series = src.series_value_and_gradient(x, false).0;
        green = green.max(rel(direct, series));
    }
    vec![
        check("orthonormality n<=25 (1e-11)", ortho <= 1e-11, format!("max |G - I| {ortho:.2e}")),
        check("addition theorem (1e-11)", addition <= 1e-11, format!("max {addition:.2e}")),
        check("gradients vs finite differences (1e-8)", fd <= 1e-8, format!("max {fd:.2e}")),
        check("Green expansion of a dipole at N=80 (1e-6)", green <= 1e-6, format!("max rel {green:.2e}")),
    ]
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_calr3d")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_default()
}

pub fn c12_cli_determinism() -> Vec<Check> {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{
  "geometry": {"r_i": 1, "r_e": 2, "r_0": 4},
  "materials": {"eps_c": 1, "eps_s": -1, "delta": 0.001, "delta_grid": {"kind": "rho_powers", "from": 3, "to": 24}},
  "source": {"kind": "dipole", "position": [0, 0, 2.4], "moment": [0, 0.6, 0.8]},
  "field": {"plane": "xz", "extent": 5, "resolution": 21},
  "lemma": {"degrees": [1, 5, 25], "draws": 4, "samples": 2000}
}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let mut out = Vec::new();
    for cmd in ["solve", "sweep", "field", "classify", "lemma-check"] {
        let mut files = Vec::new();
        let mut codes = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("{cmd}-{run}.out"));
            let (code, _) = run_cli(&[cmd, "--config", cfg, "--out", path.to_str().unwrap(), "--seed", "17"]);
            codes.push(code);
            let meta = calr3d::output::sidecar(&path, "meta.json");
            files.push((read(&path), read(&meta)));
        }
        let same = files[0] == files[1] && !files[0].0.is_empty();
        out.push(check(
            format!("{cmd} byte-identical"),
            same && codes.iter().all(|&c| c == 0),
            format!("exit {codes:?}, {} bytes", files[0].0.len()),
        ));
    }
    out
}
