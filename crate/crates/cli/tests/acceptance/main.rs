//! Acceptance suite: one PASS/FAIL line per criterion, each listing its
//! sub-checks. Exits nonzero if any criterion fails.

mod criteria;

use std::time::Instant;

pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

pub fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), pass, detail: detail.into() }
}

type Criterion = (u32, &'static str, fn() -> Vec<Check>);

fn main() {
    let all: [Criterion; 12] = [
        (1, "coefficient oracle equivalence", criteria::c01_coefficient_oracle),
        (2, "tensor / push-forward equivalence", criteria::c02_tensor_pushforward),
        (3, "energy oracle", criteria::c03_energy_oracle),
        (4, "case (i) blow-up and boundedness", criteria::c04_case_i),
        (5, "case (ii) and critical radii", criteria::c05_case_ii),
        (6, "case (iii) boundedness", criteria::c06_case_iii),
        (7, "far-field boundedness and local resonance", criteria::c07_boundedness),
        (8, "harmonic polynomial lemma", criteria::c08_lemma),
        (9, "dipole gap property", criteria::c09_gap),
        (10, "asymptotic-constant corridors", criteria::c10_corridors),
        (11, "harmonics substrate", criteria::c11_harmonics),
        (12, "CLI determinism", criteria::c12_cli_determinism),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut passed = 0;
    let mut ran = 0;
    for (id, title, f) in all {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let checks = f();
        let ok = !checks.is_empty() && checks.iter().all(|c| c.pass);
        if ok {
            passed += 1;
        }
        let parts: Vec<String> = checks
            .iter()
            .map(|c| format!("{}: {} ({})", c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail))
            .collect();
        println!(
            "criterion {id:>2} [{title}]: {} [{:.1}s] | {}",
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            parts.join("; ")
        );
    }
    println!("acceptance: {passed}/{ran} criteria passed");
    if passed != ran {
        std::process::exit(1);
    }
}
