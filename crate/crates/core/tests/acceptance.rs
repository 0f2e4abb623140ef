//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cptkit::alignment_protocol::helstrom_error;
use cptkit::linalg::ALGEBRAIC_TOL;
use cptkit::momentum_grid::MomentumGrid;
use cptkit::report::Report;
use cptkit::resource_theory::VIOLATION_THRESHOLD;
use cptkit::spin_spaces::{dicke_state, Spin, DEFAULT_MAX_PRIMITIVES};
use cptkit::suites::{self, PhaseChoice};

const SEED: u64 = 20240917;
const UNITARITY_TOL: f64 = 1e-12;
const CONSISTENCY_TOL: f64 = 1e-10;
const GRID_TOL: f64 = 1e-12;
const DFS_TOL: f64 = 1e-12;
const HELSTROM_ORACLE_TOL: f64 = 1e-15;

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_report(report: &Report) -> Outcome {
    let failing: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    Outcome {
        pass: failing.is_empty(),
        detail: if failing.is_empty() {
            format!("{} checks", report.checks.len())
        } else {
            format!("failing: {}", failing.iter().take(5).cloned().collect::<Vec<_>>().join(", "))
        },
    }
}

fn merge(outcomes: Vec<Outcome>) -> Outcome {
    Outcome {
        pass: outcomes.iter().all(|o| o.pass),
        detail: outcomes.iter().map(|o| o.detail.as_str()).collect::<Vec<_>>().join("; "),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: false,
        detail: detail.into(),
    }
}

fn ok(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: true,
        detail: detail.into(),
    }
}

fn dimensional_claims() -> Outcome {
    match suites::dimensions_suite() {
        Ok(r) => from_report(&r),
        Err(e) => fail(e.to_string()),
    }
}

fn klein_spaces() -> Vec<(u32, bool)> {
    vec![(1, true), (2, true), (3, true), (4, true), (1, false), (2, false), (4, false)]
}

fn unitarity_and_group_law() -> Outcome {
    let mut outs = Vec::new();
    for (twice, massive) in klein_spaces() {
        let r = suites::space(Spin::from_twice(twice).unwrap(), massive)
            .and_then(|sp| suites::klein_suite(&sp, &PhaseChoice::Random(100), SEED, UNITARITY_TOL));
        outs.push(match r {
            Ok(r) => from_report(&r),
            Err(e) => fail(e.to_string()),
        });
    }
    let mut out = merge(outs);
    if out.pass {
        out.detail = format!("100 conventions on each of {} spaces", klein_spaces().len());
    }
    out
}

/// ⟨0|ρ₁|0⟩ summed directly from the amplitudes with first primitive up.
fn first_site_up_weight(n: usize, k: usize) -> f64 {
    let psi = dicke_state(n, k).unwrap();
    let half = psi.len() / 2;
    psi.iter().take(half).map(|z| z.norm_sqr()).sum()
}

fn dicke_reduction() -> Outcome {
    let mut outs = Vec::new();
    for n in 1..=8usize {
        let spin = Spin::from_twice(n as u32).unwrap();
        outs.push(match suites::dicke_reduction_suite(spin, DEFAULT_MAX_PRIMITIVES) {
            Ok(r) => from_report(&r),
            Err(e) => fail(e.to_string()),
        });
        let mut worst: f64 = 0.0;
        for k in 0..=n {
            let up = first_site_up_weight(n, k);
            worst = worst.max((up - (n - k) as f64 / n as f64).abs());
        }
        outs.push(if worst <= ALGEBRAIC_TOL {
            ok(format!("n={n} oracle"))
        } else {
            fail(format!("n={n} oracle off by {worst:e}"))
        });
    }
    let mut out = merge(outs);
    if out.pass {
        out.detail = "2s = 1..8, all k".into();
    }
    out
}

fn consistency() -> Outcome {
    let r = suites::space(Spin::half(), true)
        .and_then(|sp| suites::unitary_consistency_suite(&sp, 200, SEED, CONSISTENCY_TOL));
    match r {
        Ok(r) => {
            let trials = r.checks.iter().filter(|c| c.name.starts_with("trial ")).count();
            let mut o = from_report(&r);
            if trials != 200 {
                o = fail(format!("{trials} trials run"));
            }
            o
        }
        Err(e) => fail(e.to_string()),
    }
}

fn antiunitary() -> Outcome {
    let r = match suites::antiunitary_suite(std::f64::consts::FRAC_PI_4) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let mut outs = vec![from_report(&r)];
    for kind in ["pure", "mixed"] {
        let at_zero = r.check(&format!("{kind} residual at t=0")).and_then(|c| c.residual);
        let at_t = r.check(&format!("{kind} invariance violated at t")).and_then(|c| c.residual);
        outs.push(match (at_zero, at_t) {
            (Some(z), Some(v)) if z == 0.0 && v > VIOLATION_THRESHOLD => {
                ok(format!("{kind}: residual {v:.3} at pi/4, 0 at t=0"))
            }
            other => fail(format!("{kind}: {other:?}")),
        });
    }
    merge(outs)
}

fn measures() -> Outcome {
    match suites::measures_suite() {
        Ok(r) => {
            let grid = suites::symmetry_grid();
            if grid.len() != 99 {
                return fail(format!("symmetry grid has {} points", grid.len()));
            }
            from_report(&r)
        }
        Err(e) => fail(e.to_string()),
    }
}

fn alignment() -> Outcome {
    let q0s = [0.6, 0.75, 0.9];
    let copies: Vec<u32> = (1..=8).collect();
    let mut worst: f64 = 0.0;
    for &q0 in &q0s {
        let c: f64 = 2.0 * q0 - 1.0;
        for &n in &copies {
            let oracle = 0.5 * (1.0 - (1.0 - c.abs().powi(2 * n as i32)).sqrt());
            worst = worst.max((helstrom_error(c.abs(), n).unwrap() - oracle).abs());
        }
    }
    let oracle = if worst <= HELSTROM_ORACLE_TOL {
        ok("closed form matches oracle")
    } else {
        fail(format!("closed form off by {worst:e}"))
    };
    let suite = match suites::alignment_suite(&q0s, &copies, 10_000, SEED) {
        Ok(r) => from_report(&r),
        Err(e) => fail(e.to_string()),
    };
    merge(vec![oracle, suite])
}

fn momentum() -> Outcome {
    let grid = MomentumGrid::default();
    if grid.len() != 32 {
        return fail(format!("default grid has {} points", grid.len()));
    }
    let r = suites::space(Spin::half(), true)
        .and_then(|sp| suites::momentum_suite(&sp, &grid, 100, SEED, GRID_TOL));
    match r {
        Ok(r) => from_report(&r),
        Err(e) => fail(e.to_string()),
    }
}

fn dfs() -> Outcome {
    let spaces = match suites::dfs_spaces() {
        Ok(s) => s,
        Err(e) => return fail(e.to_string()),
    };
    let mut outs = Vec::new();
    for sp in &spaces {
        let expected = if sp.massive {
            (2.0 * (2.0 * sp.spin.as_f64() + 1.0)).log2()
        } else {
            2.0
        };
        let logical = sp.dim() / 2;
        outs.push(if (logical as f64).log2() == expected {
            ok(String::new())
        } else {
            fail(format!("logical dim {logical} for s={}", sp.spin))
        });
    }
    let suite = match suites::dfs_suite(&spaces, 100, 100, SEED, DFS_TOL) {
        Ok(r) => from_report(&r),
        Err(e) => fail(e.to_string()),
    };
    let mut out = merge(outs);
    out.pass &= suite.pass;
    out.detail = suite.detail;
    out
}

fn seeded_reports() -> Vec<(&'static str, cptkit::Result<Report>)> {
    let half = || suites::space(Spin::half(), true);
    vec![
        (
            "klein",
            half().and_then(|sp| suites::klein_suite(&sp, &PhaseChoice::Random(20), SEED, UNITARITY_TOL)),
        ),
        (
            "unitary-consistency",
            half().and_then(|sp| suites::unitary_consistency_suite(&sp, 20, SEED, CONSISTENCY_TOL)),
        ),
        ("alignment", suites::alignment_suite(&[0.75], &[1, 4], 2_000, SEED)),
        (
            "momentum",
            half().and_then(|sp| suites::momentum_suite(&sp, &MomentumGrid::default(), 10, SEED, GRID_TOL)),
        ),
        (
            "dfs",
            suites::dfs_spaces().and_then(|s| suites::dfs_suite(&s[..2], 10, 20, SEED, DFS_TOL)),
        ),
        ("measures", suites::measures_suite()),
        ("dimensions", suites::dimensions_suite()),
    ]
}

fn determinism() -> Outcome {
    let first = seeded_reports();
    let second = seeded_reports();
    let mut differing = Vec::new();
    for ((name, a), (_, b)) in first.into_iter().zip(second) {
        match (a, b) {
            (Ok(a), Ok(b)) if a.to_json() == b.to_json() => {}
            _ => differing.push(name),
        }
    }
    if differing.is_empty() {
        ok("7 suites byte-identical")
    } else {
        fail(format!("differing: {}", differing.join(", ")))
    }
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (1, "dimensional claims", Duration::from_secs(1), dimensional_claims),
        (2, "unitarity and Klein group law", Duration::from_secs(10), unitarity_and_group_law),
        (3, "Dicke single-site reduction", Duration::from_secs(30), dicke_reduction),
        (4, "unitary consistency", Duration::from_secs(30), consistency),
        (5, "anti-unitary inconsistency", Duration::from_secs(1), antiunitary),
        (6, "measures", Duration::from_secs(1), measures),
        (7, "alignment protocol", Duration::from_secs(60), alignment),
        (8, "momentum extension", Duration::from_secs(10), momentum),
        (9, "DFS codec", Duration::from_secs(30), dfs),
        (10, "determinism", Duration::from_secs(60), determinism),
    ];
    let mut all = true;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = outcome.pass && in_time;
        all &= pass;
        println!(
            "criterion {id:>2} {} {name}: {} ({:.2} s, budget {} s{})",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" },
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
